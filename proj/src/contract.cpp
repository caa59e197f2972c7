#include "fedpot/contract.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedpot::contract {

void ContractMenu::validate() const {
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].type_index <= items[i - 1].type_index)
      throw std::invalid_argument("contract menu: type indices must be strictly increasing");
    if (items[i].theta < items[i - 1].theta)
      throw std::invalid_argument("contract menu: thetas must be non-decreasing");
  }
}

std::string to_string(const Violation& v) {
  const char* kind = v.kind == ViolationKind::Monotonicity ? "monotonicity"
                     : v.kind == ViolationKind::Ldic       ? "LDIC"
                                                           : "LUIC";
  return std::string(kind) + "(" + std::to_string(v.type_a) + "," + std::to_string(v.type_b) + ")";
}

double min_feasible_reward(double theta, double cost) {
  if (!(theta > 0.0)) throw std::invalid_argument("min_feasible_reward: theta must be > 0");
  return std::exp(cost) / theta;
}

SelectionResult select_participants(std::span<const Candidate> candidates, double budget, double deadline) {
  if (!(budget >= 0.0)) throw std::invalid_argument("select_participants: budget must be >= 0");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.t_total <= deadline && c.required_reward > 0.0 && c.required_reward <= budget) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = candidates[a];
    const auto& cb = candidates[b];
    // Cross-multiplied density comparison; rewards are positive.
    const double lhs = ca.phi * cb.required_reward;
    const double rhs = cb.phi * ca.required_reward;
    if (lhs != rhs) return lhs > rhs;
    return ca.id < cb.id;
  });

  // Density greedy completed from every feasible seed set of at most two
  // candidates; the best completion wins (earlier seeds win ties).
  auto complete = [&](std::vector<std::size_t> chosen, double spent) {
    for (auto i : order) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      if (spent + candidates[i].required_reward <= budget) {
        spent += candidates[i].required_reward;
        chosen.push_back(i);
      }
    }
    return chosen;
  };
  auto score = [&](const std::vector<std::size_t>& set) {
    double phi = 0.0;
    for (auto i : set) phi += candidates[i].phi;
    return phi;
  };

  std::vector<std::size_t> greedy = complete({}, 0.0);
  double objective = score(greedy);
  for (std::size_t a = 0; a < order.size(); ++a) {
    const double ra = candidates[order[a]].required_reward;
    for (std::size_t b = a; b < order.size(); ++b) {
      std::vector<std::size_t> seed{order[a]};
      double spent = ra;
      if (b != a) {
        spent += candidates[order[b]].required_reward;
        if (spent > budget) continue;
        seed.push_back(order[b]);
      }
      auto trial = complete(std::move(seed), spent);
      const double value = score(trial);
      if (value > objective) {
        objective = value;
        greedy = std::move(trial);
      }
    }
  }
  double spent = 0.0;
  for (auto i : greedy) spent += candidates[i].required_reward;

  SelectionResult r;
  r.indicator.assign(candidates.size(), 0);
  for (auto i : greedy) {
    r.indicator[i] = 1;
    r.selected.push_back(candidates[i].id);
    r.deadline_used = std::max(r.deadline_used, candidates[i].t_total);
  }
  std::sort(r.selected.begin(), r.selected.end());
  r.objective = objective;
  r.total_reward = spent;
  return r;
}

std::vector<Violation> verify_monotonicity(const ContractMenu& menu) {
  menu.validate();
  std::vector<Violation> out;
  const auto& it = menu.items;
  for (std::size_t a = 0; a < it.size(); ++a)
    for (std::size_t b = a + 1; b < it.size(); ++b)
      if (it[a].reward > it[b].reward)
        out.push_back({ViolationKind::Monotonicity, it[a].type_index, it[b].type_index});
  return out;
}

std::vector<Violation> verify_ldic_luic(const ContractMenu& menu) {
  menu.validate();
  const auto& it = menu.items;
  for (const auto& item : it)
    if (!(item.theta * item.reward > 0.0))
      throw std::invalid_argument("verify_ldic_luic: theta * reward must be > 0 for type " +
                                  std::to_string(item.type_index));

  auto utility = [](double theta, const ContractItem& offered) {
    return std::log(theta * offered.reward) - offered.cost;
  };

  // Rounding slack so that menus built to hold with equality are not flagged.
  constexpr double kSlack = 1e-12;
  std::vector<Violation> out;
  for (std::size_t m = 1; m < it.size(); ++m)
    if (utility(it[m].theta, it[m]) < utility(it[m].theta, it[m - 1]) - kSlack)
      out.push_back({ViolationKind::Ldic, it[m].type_index, it[m - 1].type_index});
  for (std::size_t m = 0; m + 1 < it.size(); ++m)
    if (utility(it[m].theta, it[m]) > utility(it[m].theta, it[m + 1]) + kSlack)
      out.push_back({ViolationKind::Luic, it[m].type_index, it[m + 1].type_index});
  return out;
}

}  // namespace fedpot::contract
