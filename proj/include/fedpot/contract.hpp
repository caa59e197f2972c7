#pragma once

#include <span>
#include <string>
#include <vector>

namespace fedpot::contract {

struct ContractItem {
  int type_index = 1;
  double theta = 1.0;
  double reward = 1.0;
  double cost = 0.0;
};

// Items sorted by type, thetas non-decreasing.
struct ContractMenu {
  std::vector<ContractItem> items;

  void validate() const;
};

struct Candidate {
  int id = 0;
  double phi = 0.0;
  double required_reward = 0.0;
  double t_total = 0.0;
};

struct SelectionResult {
  std::vector<int> selected;   // ascending ids
  std::vector<int> indicator;  // aligned with the candidate list
  double objective = 0.0;
  double total_reward = 0.0;
  double deadline_used = 0.0;  // slowest admitted latency, 0 when empty
};

enum class ViolationKind { Monotonicity, Ldic, Luic };

struct Violation {
  ViolationKind kind;
  int type_a;
  int type_b;

  bool operator==(const Violation&) const = default;
};

std::string to_string(const Violation& v);

// Smallest reward with non-negative supplier utility: e^cost / theta.
double min_feasible_reward(double theta, double cost);

// Density greedy for the budgeted max-quality selection. Candidates slower
// than the deadline are dropped, the rest are taken by phi/reward (ties: lower
// id) while they fit. The greedy fill is also run from every feasible seed of
// one or two candidates and the best fill is returned.
SelectionResult select_participants(std::span<const Candidate> candidates,
                                    double budget, double deadline);

// Pairs (m, m') with m < m' whose rewards decrease.
std::vector<Violation> verify_monotonicity(const ContractMenu& menu);

// Adjacent-type downward and upward incentive checks.
std::vector<Violation> verify_ldic_luic(const ContractMenu& menu);

}  // namespace fedpot::contract
