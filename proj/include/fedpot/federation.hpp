#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "fedpot/dataset.hpp"
#include "fedpot/learner.hpp"
#include "fedpot/radio_cost.hpp"

namespace fedpot::federation {

using learner::ParameterVector;

enum class AttackKind { None, RandomParams, GaussianPerturb };

struct Attack {
  AttackKind kind = AttackKind::None;
  double sigma = 0.0;  // GaussianPerturb only
};

// One simulated supplier.
struct SpsProfile {
  int id = 0;
  radio::ChannelSpec channel;
  radio::ComputeSpec compute;
  LabeledDataset local_data;
  bool honest = true;
  double true_phi = 0.0;
  double claimed_phi = 0.0;
  Attack attack;
  std::uint64_t seed = 0;
};

enum class AggregationScheme { ConventionalFedAvg, TrustBased, UntrustBased };

enum class VerificationMethod { TestSet, EuclideanScreen };

struct VerificationConfig {
  VerificationMethod method = VerificationMethod::TestSet;
  double screen_multiplier = 3.0;
  double accuracy_floor = 0.0;
  // Screened-out uploads get no reward instead of the softmax share of 0.
  bool strict_rewards = false;

  void validate() const;
};

enum class BudgetPolicy { Even, Fixed };

struct FederationSettings {
  learner::MlpArchitecture arch;
  learner::TrainingConfig training;
  // Step decay of the learning rate every N rounds; 0 disables.
  int lr_decay_every = 0;
  double lr_decay_factor = 0.5;

  AggregationScheme scheme = AggregationScheme::UntrustBased;
  VerificationConfig verification;

  double total_budget = 300.0;
  int rounds = 30;
  BudgetPolicy budget_policy = BudgetPolicy::Even;
  double fixed_round_budget = 10.0;
  double deadline = 10.0;
  double reward_multiplier = 1.0;
  double reward_floor = 0.0;
  int num_types = 0;  // 0: one type per supplier

  std::set<int> positive_labels;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: FEDPOT_THREADS or hardware concurrency

  void validate() const;
};

struct ClientRecord {
  int id = 0;
  bool malicious = false;
  double claimed_phi = 0.0;
  int type_index = 1;
  double theta = 1.0;
  double required_reward = 0.0;
  double weight = 0.0;
  double revenue = 0.0;  // G: test accuracy minus floor, clamped at 0
  double reward = 0.0;
  radio::CostBreakdown cost;
  // Unset for an unpaid (strictly screened) supplier.
  std::optional<double> utility;
  bool accepted = true;
  double distance_to_global = 0.0;
};

struct RoundReport {
  int round = 0;
  std::vector<int> selected;
  std::vector<ClientRecord> clients;  // selected suppliers, ascending id
  learner::EvalMetrics metrics;
  std::optional<double> fairness;
  std::optional<double> deviation;
  double budget_round = 0.0;
  double budget_spent = 0.0;
  double objective = 0.0;
  double slowest_latency = 0.0;
  double tpr_utility = 0.0;
  // Set when every revenue was zero and uniform weights were used instead.
  bool degenerate_weights = false;
};

struct ExperimentSummary {
  int rounds = 0;
  learner::EvalMetrics initial_metrics;
  learner::EvalMetrics final_metrics;
  double total_budget = 0.0;
  double total_spent = 0.0;
  std::optional<double> mean_fairness;
  std::optional<double> final_deviation;
};

struct ExperimentResult {
  std::vector<RoundReport> reports;
  ExperimentSummary summary;
  ParameterVector final_global;
  std::vector<ParameterVector> global_trajectory;  // after each round
};

// Everything a run needs; `profiles` ids must be unique.
struct ExperimentSetup {
  FederationSettings settings;
  std::vector<SpsProfile> profiles;
  LabeledDataset test_set;
  // Run a paired all-honest copy first and report distances against it.
  bool shadow_run = false;
};

// Mutable orchestrator state between rounds.
struct ExperimentState {
  FederationSettings settings;
  std::vector<SpsProfile> profiles;
  LabeledDataset test_set;
  ParameterVector global;
  int round = 0;
  double spent = 0.0;
};

// Weights proportional to non-negative values; exactly 1/n when all are equal.
std::vector<double> normalize_weights(std::span<const double> values);

std::vector<double> trust_weights(std::span<const double> claimed_phis);

std::vector<double> conventional_weights(std::span<const double> data_sizes);

struct UntrustResult {
  std::vector<double> weights;
  std::vector<double> revenues;
  bool degenerate = false;
};

// Revenue-based weights. `accepted`, when given, zeroes screened-out uploads.
UntrustResult untrust_weights(std::span<const ParameterVector> models, const LabeledDataset& test,
                              double accuracy_floor = 0.0, const std::vector<bool>& accepted = {});

std::vector<bool> euclidean_screen(const ParameterVector& previous_global,
                                   std::span<const ParameterVector> uploads, double multiplier);

ParameterVector aggregate(std::span<const ParameterVector> models, std::span<const double> weights);

std::vector<double> softmax_rewards(std::span<const double> weights, double budget);

// Jain index over reward-share / contribution-share ratios.
double fairness_index(std::span<const double> rewards, std::span<const double> contributions);

ParameterVector adversarial_upload(const SpsProfile& profile, const ParameterVector& trained,
                                   std::uint64_t seed);

double model_deviation(const ParameterVector& current, const ParameterVector& reference);

// Same suppliers with every attack removed and claims set to the true quality.
std::vector<SpsProfile> honest_copies(std::span<const SpsProfile> profiles);

ExperimentState make_state(const ExperimentSetup& setup);

RoundReport run_round(ExperimentState& state, AggregationScheme scheme, const VerificationConfig& verification,
                      const ParameterVector* shadow_global = nullptr);

ExperimentResult run_experiment(const ExperimentSetup& setup);

// Single model trained on the pooled data with the same optimizer settings.
ParameterVector train_centralized(const LabeledDataset& pooled, const learner::MlpArchitecture& arch,
                                  learner::TrainingConfig cfg, std::uint64_t init_seed);

// requested = 0 means hardware concurrency; FEDPOT_THREADS caps the result.
std::size_t resolve_threads(std::size_t requested);

}  // namespace fedpot::federation
