#include "fedpot/federation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>

#include "fedpot/contract.hpp"
#include "fedpot/quality.hpp"
#include "fedpot/rng.hpp"

namespace fedpot::federation {

namespace {

constexpr double kWeightSumTolerance = 1e-9;

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(n, std::max<std::size_t>(threads, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

UntrustResult weights_from_accuracies(std::span<const double> accuracies, double accuracy_floor,
                                      const std::vector<bool>& accepted) {
  UntrustResult r;
  const std::size_t n = accuracies.size();
  r.revenues.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool ok = accepted.empty() || accepted[i];
    r.revenues[i] = ok ? std::max(0.0, accuracies[i] - accuracy_floor) : 0.0;
  }
  double total = 0.0;
  for (double g : r.revenues) total += g;
  if (total > 0.0) {
    r.weights = normalize_weights(r.revenues);
    return r;
  }
  // Nothing earned revenue: fall back to uniform over the accepted uploads.
  r.degenerate = true;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) kept += (accepted.empty() || accepted[i]) ? 1 : 0;
  if (kept == 0) {
    r.weights = uniform_weights(n);
    return r;
  }
  r.weights.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (accepted.empty() || accepted[i]) r.weights[i] = 1.0 / static_cast<double>(kept);
  return r;
}

double learning_rate_for_round(const FederationSettings& s, int round) {
  if (s.lr_decay_every <= 0) return s.training.learning_rate;
  const int steps = (round - 1) / s.lr_decay_every;
  return s.training.learning_rate * std::pow(s.lr_decay_factor, steps);
}

}  // namespace

void VerificationConfig::validate() const {
  if (!(screen_multiplier > 0.0)) throw std::invalid_argument("verification.screen_multiplier must be > 0");
  if (!(accuracy_floor >= 0.0 && accuracy_floor <= 1.0))
    throw std::invalid_argument("verification.accuracy_floor must lie in [0,1]");
}

void FederationSettings::validate() const {
  arch.validate();
  training.validate();
  verification.validate();
  if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
  if (!(total_budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
  if (!(fixed_round_budget >= 0.0)) throw std::invalid_argument("fixed round budget must be >= 0");
  if (!(deadline > 0.0)) throw std::invalid_argument("deadline must be > 0");
  if (!(reward_multiplier > 0.0)) throw std::invalid_argument("reward_multiplier must be > 0");
  if (!(reward_floor >= 0.0)) throw std::invalid_argument("reward_floor must be >= 0");
  if (num_types < 0) throw std::invalid_argument("num_types must be >= 0");
  if (lr_decay_every < 0 || !(lr_decay_factor > 0.0)) throw std::invalid_argument("invalid learning-rate decay");
}

std::vector<double> normalize_weights(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("normalize_weights: empty input");
  double total = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("normalize_weights: values must be finite and >= 0");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("normalize_weights: all values are zero");
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }))
    return uniform_weights(values.size());
  std::vector<double> w(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) w[i] = values[i] / total;
  return w;
}

std::vector<double> trust_weights(std::span<const double> claimed_phis) { return normalize_weights(claimed_phis); }

std::vector<double> conventional_weights(std::span<const double> data_sizes) {
  for (double d : data_sizes)
    if (!(d > 0.0)) throw std::invalid_argument("conventional_weights: data sizes must be positive");
  return normalize_weights(data_sizes);
}

UntrustResult untrust_weights(std::span<const ParameterVector> models, const LabeledDataset& test,
                              double accuracy_floor, const std::vector<bool>& accepted) {
  if (models.empty()) throw std::invalid_argument("untrust_weights: no models");
  if (test.empty()) throw std::invalid_argument("untrust_weights: empty test set");
  if (!accepted.empty() && accepted.size() != models.size())
    throw std::invalid_argument("untrust_weights: accept flags do not match models");
  std::vector<double> acc(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) acc[i] = learner::accuracy(models[i], test);
  return weights_from_accuracies(acc, accuracy_floor, accepted);
}

std::vector<bool> euclidean_screen(const ParameterVector& previous_global, std::span<const ParameterVector> uploads,
                                   double multiplier) {
  if (!(multiplier > 0.0)) throw std::invalid_argument("euclidean_screen: multiplier must be > 0");
  std::vector<double> dist(uploads.size());
  for (std::size_t i = 0; i < uploads.size(); ++i) dist[i] = learner::param_distance(uploads[i], previous_global);
  std::vector<bool> accept(uploads.size(), true);
  if (uploads.size() <= 2) return accept;

  auto sorted = dist;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (std::size_t i = 0; i < n; ++i) accept[i] = dist[i] <= multiplier * median;
  return accept;
}

ParameterVector aggregate(std::span<const ParameterVector> models, std::span<const double> weights) {
  if (models.empty()) throw std::invalid_argument("aggregate: no models");
  if (weights.size() != models.size()) throw std::invalid_argument("aggregate: weight count mismatch");
  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - 1.0) > kWeightSumTolerance)
    throw std::invalid_argument("aggregate: weights sum to " + std::to_string(total) + ", expected 1");
  for (const auto& m : models)
    if (!m.same_layout(models.front()) || m.size() != models.front().size())
      throw std::invalid_argument("aggregate: layout mismatch");

  ParameterVector out;
  out.arch = models.front().arch;
  out.values.assign(models.front().size(), 0.0);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const double w = weights[k];
    const auto& v = models[k].values;
    for (std::size_t i = 0; i < v.size(); ++i) out.values[i] += w * v[i];
  }
  return out;
}

std::vector<double> softmax_rewards(std::span<const double> weights, double budget) {
  if (weights.empty()) throw std::invalid_argument("softmax_rewards: empty weights");
  if (!(budget >= 0.0)) throw std::invalid_argument("softmax_rewards: budget must be >= 0");
  const double mx = *std::max_element(weights.begin(), weights.end());
  std::vector<double> r(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    r[i] = std::exp(weights[i] - mx);
    total += r[i];
  }
  for (auto& v : r) v = v / total * budget;
  return r;
}

double fairness_index(std::span<const double> rewards, std::span<const double> contributions) {
  if (rewards.size() != contributions.size()) throw std::invalid_argument("fairness_index: length mismatch");
  if (rewards.empty()) throw std::invalid_argument("fairness_index: empty input");
  double reward_total = 0.0;
  double contrib_total = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (!(contributions[i] >= 0.0) || !(rewards[i] >= 0.0))
      throw std::invalid_argument("fairness_index: negative entry");
    reward_total += rewards[i];
    contrib_total += contributions[i];
  }
  if (!(contrib_total > 0.0)) throw std::invalid_argument("fairness_index: contributions sum to zero");

  const std::size_t n = rewards.size();
  std::vector<double> ratio(n, 0.0);
  std::vector<bool> unearned(n, false);
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double reward_share = reward_total > 0.0 ? rewards[i] / reward_total : 0.0;
    const double contrib_share = contributions[i] / contrib_total;
    if (contrib_share > 0.0) {
      ratio[i] = reward_share / contrib_share;
      max_ratio = std::max(max_ratio, ratio[i]);
    } else if (reward_share > 0.0) {
      unearned[i] = true;
    } else {
      ratio[i] = 1.0;  // nothing given, nothing earned
    }
  }
  // Paying a zero contributor counts as the worst observed overpayment, tenfold.
  for (std::size_t i = 0; i < n; ++i)
    if (unearned[i]) ratio[i] = 10.0 * std::max(max_ratio, 1.0);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (double r : ratio) {
    sum += r;
    sum_sq += r * r;
  }
  if (sum_sq == 0.0) return 0.0;
  return sum * sum / (static_cast<double>(n) * sum_sq);
}

ParameterVector adversarial_upload(const SpsProfile& profile, const ParameterVector& trained, std::uint64_t seed) {
  switch (profile.attack.kind) {
    case AttackKind::None:
      throw std::invalid_argument("adversarial_upload: supplier " + std::to_string(profile.id) + " has no attack");
    case AttackKind::RandomParams:
      return learner::init_params(trained.arch, seed);
    case AttackKind::GaussianPerturb: {
      if (!(profile.attack.sigma >= 0.0)) throw std::invalid_argument("adversarial_upload: sigma must be >= 0");
      ParameterVector out = trained;
      if (profile.attack.sigma == 0.0) return out;
      Rng rng(derive_seed(seed, {0x6a55}));
      std::normal_distribution<double> noise(0.0, profile.attack.sigma);
      for (auto& v : out.values) v += noise(rng);
      return out;
    }
  }
  throw std::logic_error("adversarial_upload: unknown attack");
}

double model_deviation(const ParameterVector& current, const ParameterVector& reference) {
  return learner::param_distance(current, reference);
}

std::vector<SpsProfile> honest_copies(std::span<const SpsProfile> profiles) {
  std::vector<SpsProfile> out(profiles.begin(), profiles.end());
  for (auto& p : out) {
    p.honest = true;
    p.attack = {};
    p.claimed_phi = p.true_phi;
  }
  return out;
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FEDPOT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = std::min(n, static_cast<std::size_t>(v));
  }
  return n;
}

ExperimentState make_state(const ExperimentSetup& setup) {
  setup.settings.validate();
  ExperimentState st;
  st.settings = setup.settings;
  st.profiles = setup.profiles;
  st.test_set = setup.test_set;
  if (st.test_set.empty()) throw std::invalid_argument("experiment: TPR test set is empty");
  std::sort(st.profiles.begin(), st.profiles.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < st.profiles.size(); ++i)
    if (st.profiles[i].id == st.profiles[i - 1].id)
      throw std::invalid_argument("experiment: duplicate supplier id " + std::to_string(st.profiles[i].id));

  const double model_bits = static_cast<double>(st.settings.arch.parameter_count()) * 32.0;
  for (auto& p : st.profiles) {
    p.channel.model_size_bits = model_bits;
    p.compute.local_epochs = st.settings.training.epochs;
    p.compute.sample_count = static_cast<double>(std::max<std::size_t>(p.local_data.size(), 1));
    if (!(p.claimed_phi >= 0.0 && p.claimed_phi <= 1.0))
      throw std::invalid_argument("supplier " + std::to_string(p.id) + ": claimed_phi outside [0,1]");
  }
  st.global = learner::init_params(st.settings.arch, derive_seed(st.settings.seed, {0x61}));
  return st;
}

RoundReport run_round(ExperimentState& st, AggregationScheme scheme, const VerificationConfig& verification,
                      const ParameterVector* shadow_global) {
  const auto& s = st.settings;
  verification.validate();
  const int z = ++st.round;

  RoundReport rep;
  rep.round = z;
  const double remaining = std::max(0.0, s.total_budget - st.spent);
  double budget_z = s.budget_policy == BudgetPolicy::Even
                        ? (s.rounds > 0 ? s.total_budget / static_cast<double>(s.rounds) : 0.0)
                        : s.fixed_round_budget;
  budget_z = std::min(budget_z, remaining);
  rep.budget_round = budget_z;

  const int num_types = s.num_types > 0 ? s.num_types : static_cast<int>(std::max<std::size_t>(st.profiles.size(), 1));

  // Quote every supplier that can train: IR-floor reward at its claimed type.
  std::vector<contract::Candidate> candidates;
  std::vector<std::size_t> candidate_profile;
  std::vector<ClientRecord> quotes;
  for (std::size_t i = 0; i < st.profiles.size(); ++i) {
    const auto& p = st.profiles[i];
    if (p.local_data.empty()) continue;
    ClientRecord q;
    q.id = p.id;
    q.malicious = !p.honest;
    q.claimed_phi = p.claimed_phi;
    q.type_index = quality::assign_type(p.claimed_phi, num_types);
    q.theta = static_cast<double>(q.type_index);
    q.cost = radio::cost_breakdown(p.channel, p.compute);
    q.required_reward =
        std::max(s.reward_floor, s.reward_multiplier * contract::min_feasible_reward(q.theta, q.cost.c_total));
    candidates.push_back({p.id, p.claimed_phi, q.required_reward, q.cost.t_total});
    candidate_profile.push_back(i);
    quotes.push_back(q);
  }
  const auto selection = contract::select_participants(candidates, budget_z, s.deadline);
  rep.selected = selection.selected;
  rep.objective = selection.objective;

  std::vector<std::size_t> chosen;  // indices into candidates, ascending id
  for (std::size_t c = 0; c < candidates.size(); ++c)
    if (selection.indicator[c]) chosen.push_back(c);

  if (chosen.empty()) {
    rep.metrics = learner::evaluate(st.global, st.test_set, s.positive_labels);
    if (shadow_global) rep.deviation = model_deviation(st.global, *shadow_global);
    return rep;
  }

  const std::size_t n = chosen.size();
  std::vector<ParameterVector> uploads(n);
  std::vector<double> accuracies(n);
  learner::TrainingConfig cfg = s.training;
  cfg.learning_rate = learning_rate_for_round(s, z);
  const ParameterVector& broadcast = st.global;

  parallel_for(n, resolve_threads(s.threads), [&](std::size_t k) {
    const auto& p = st.profiles[candidate_profile[chosen[k]]];
    learner::TrainingConfig local = cfg;
    local.seed = derive_seed(p.seed, {static_cast<std::uint64_t>(z)});
    auto trained = learner::local_train(broadcast, p.local_data, local).params;
    if (!p.honest && p.attack.kind != AttackKind::None)
      trained = adversarial_upload(p, trained, derive_seed(p.seed, {static_cast<std::uint64_t>(z), 0xbad}));
    accuracies[k] = learner::accuracy(trained, st.test_set);
    uploads[k] = std::move(trained);
  });

  std::vector<bool> accepted(n, true);
  if (scheme == AggregationScheme::UntrustBased && verification.method == VerificationMethod::EuclideanScreen)
    accepted = euclidean_screen(broadcast, uploads, verification.screen_multiplier);
  const auto untrust = weights_from_accuracies(accuracies, verification.accuracy_floor, accepted);

  std::vector<double> weights;
  switch (scheme) {
    case AggregationScheme::ConventionalFedAvg: {
      std::vector<double> sizes(n);
      for (std::size_t k = 0; k < n; ++k) sizes[k] = static_cast<double>(st.profiles[candidate_profile[chosen[k]]].local_data.size());
      weights = conventional_weights(sizes);
      break;
    }
    case AggregationScheme::TrustBased: {
      std::vector<double> phis(n);
      for (std::size_t k = 0; k < n; ++k) phis[k] = quotes[chosen[k]].claimed_phi;
      if (std::all_of(phis.begin(), phis.end(), [](double v) { return v == 0.0; })) {
        weights = uniform_weights(n);
        rep.degenerate_weights = true;
      } else {
        weights = trust_weights(phis);
      }
      break;
    }
    case AggregationScheme::UntrustBased:
      weights = untrust.weights;
      rep.degenerate_weights = untrust.degenerate;
      break;
  }

  // Revenue G is measured for every scheme; only UntrustBased weights by it.
  std::vector<double> revenues(n);
  for (std::size_t k = 0; k < n; ++k) revenues[k] = std::max(0.0, accuracies[k] - verification.accuracy_floor);

  std::vector<double> rewards(n, 0.0);
  const bool any_rejected = std::find(accepted.begin(), accepted.end(), false) != accepted.end();
  const bool any_accepted = std::find(accepted.begin(), accepted.end(), true) != accepted.end();
  if (verification.strict_rewards && any_rejected && any_accepted) {
    std::vector<double> kept_weights;
    for (std::size_t k = 0; k < n; ++k)
      if (accepted[k]) kept_weights.push_back(weights[k]);
    const auto kept_rewards = softmax_rewards(kept_weights, budget_z);
    for (std::size_t k = 0, j = 0; k < n; ++k)
      if (accepted[k]) rewards[k] = kept_rewards[j++];
  } else {
    rewards = softmax_rewards(weights, budget_z);
  }

  std::vector<radio::CostBreakdown> chosen_costs;
  std::vector<radio::TprEntry> tpr_entries;
  double paid = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ClientRecord rec = quotes[chosen[k]];
    rec.weight = weights[k];
    rec.revenue = revenues[k];
    rec.reward = rewards[k];
    rec.accepted = accepted[k];
    rec.distance_to_global = learner::param_distance(uploads[k], broadcast);
    if (rec.theta * rec.reward > 0.0) rec.utility = radio::sps_utility(rec.theta, rec.reward, rec.cost.c_total);
    chosen_costs.push_back(rec.cost);
    tpr_entries.push_back({rec.theta, rec.revenue, rec.reward});
    paid += rec.reward;
    rep.clients.push_back(std::move(rec));
  }
  rep.slowest_latency = radio::round_deadline(chosen_costs);
  rep.tpr_utility = radio::tpr_utility(tpr_entries);
  rep.budget_spent = paid;

  double revenue_total = 0.0;
  for (double g : revenues) revenue_total += g;
  if (revenue_total > 0.0) rep.fairness = fairness_index(rewards, revenues);

  st.global = aggregate(uploads, weights);
  st.spent += budget_z;
  rep.metrics = learner::evaluate(st.global, st.test_set, s.positive_labels);
  if (shadow_global) rep.deviation = model_deviation(st.global, *shadow_global);
  return rep;
}

ExperimentResult run_experiment(const ExperimentSetup& setup) {
  std::vector<ParameterVector> shadow;
  if (setup.shadow_run) {
    ExperimentSetup honest = setup;
    honest.shadow_run = false;
    honest.profiles = honest_copies(setup.profiles);
    shadow = run_experiment(honest).global_trajectory;
  }

  ExperimentState st = make_state(setup);
  ExperimentResult result;
  result.summary.initial_metrics = learner::evaluate(st.global, st.test_set, st.settings.positive_labels);
  result.summary.final_metrics = result.summary.initial_metrics;
  result.summary.total_budget = st.settings.total_budget;

  double fairness_sum = 0.0;
  int fairness_count = 0;
  for (int z = 0; z < st.settings.rounds; ++z) {
    const ParameterVector* reference = shadow.empty() ? nullptr : &shadow[static_cast<std::size_t>(z)];
    auto rep = run_round(st, st.settings.scheme, st.settings.verification, reference);
    result.summary.total_spent += rep.budget_spent;
    result.summary.final_metrics = rep.metrics;
    result.summary.final_deviation = rep.deviation;
    if (rep.fairness) {
      fairness_sum += *rep.fairness;
      ++fairness_count;
    }
    result.reports.push_back(std::move(rep));
    result.global_trajectory.push_back(st.global);
  }
  result.summary.rounds = static_cast<int>(result.reports.size());
  if (fairness_count > 0) result.summary.mean_fairness = fairness_sum / fairness_count;
  result.final_global = st.global;
  return result;
}

ParameterVector train_centralized(const LabeledDataset& pooled, const learner::MlpArchitecture& arch,
                                  learner::TrainingConfig cfg, std::uint64_t init_seed) {
  auto params = learner::init_params(arch, init_seed);
  return learner::local_train(params, pooled, cfg).params;
}

}  // namespace fedpot::federation
