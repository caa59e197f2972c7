#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedpot/contract.hpp"
#include "fedpot/dataset.hpp"
#include "fedpot/federation.hpp"

namespace fedpot::config {

using json = nlohmann::json;

// Raised with a dotted key path, e.g. "learner.epochs: expected an integer".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

struct DatasetConfig {
  std::string source = "synthetic";  // synthetic | csv | csv_devices
  std::string path;                  // csv
  std::vector<std::string> device_paths;  // csv_devices: one file per supplier
  std::string test_path;             // csv_devices: held-out device
  std::string label_column = "label";
  std::string benign_label;          // class name; empty means label id 0
  SyntheticSpec synthetic{20, 6, 300, 0.15, 0};
  double train_fraction = 0.8;
  std::size_t subsample = 0;         // rows per file, 0 keeps all
  bool normalize = true;
  std::uint64_t split_seed = 0;
  bool operator==(const DatasetConfig&) const = default;
};

struct PartitionConfig {
  std::string mode = "non_iid";  // iid | non_iid
  std::size_t max_classes_per_client = 2;
  std::uint64_t seed = 0;
  bool operator==(const PartitionConfig&) const = default;
};

struct AdversaryConfig {
  double malicious_fraction = 0.0;
  std::string attack = "random_params";  // random_params | gaussian_perturb
  double sigma = 1.0;
  std::uint64_t seed = 0;
  bool operator==(const AdversaryConfig&) const = default;
};

struct QualityConfig {
  std::size_t grid_points = 64;
  std::string reference_mode = "pooled";  // pooled | uniform
  std::size_t reference_size = 1000;
  std::uint64_t seed = 0;
  int num_types = 0;
  bool operator==(const QualityConfig&) const = default;
};

struct LearnerConfig {
  std::vector<std::size_t> hidden_sizes;  // empty: size from input dimension
  int epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  int lr_decay_every = 0;
  double lr_decay_factor = 0.5;
  bool operator==(const LearnerConfig&) const = default;
};

struct SpsOverride {
  int id = 0;
  json values;  // subset of radio keys with scalar values
  bool operator==(const SpsOverride&) const = default;
};

struct RadioConfig {
  Range bandwidth_share{0.5e6, 2e6};
  Range transmit_power{0.05, 0.2};
  Range channel_gain_sq{1e-7, 1e-6};
  Range noise_power{1e-8, 1e-8};
  Range upload_power{0.1, 0.3};
  Range cycles_per_sample{1e4, 3e4};
  Range cpu_frequency{1e9, 2e9};
  Range chip_coefficient{1e-28, 1e-28};
  Range deploy_cost{0.2, 1.0};
  std::uint64_t seed = 0;
  std::vector<SpsOverride> overrides;
  bool operator==(const RadioConfig&) const = default;
};

struct ContractConfig {
  double budget = 300.0;
  int rounds = 30;
  std::string budget_policy = "even";  // even | fixed
  double round_budget = 10.0;
  double deadline = 10.0;
  double reward_multiplier = 1.0;
  double reward_floor = 0.0;
  bool operator==(const ContractConfig&) const = default;
};

struct VerificationSection {
  std::string method = "test_set";  // test_set | euclidean_screen
  double screen_multiplier = 3.0;
  double accuracy_floor = 0.0;
  bool strict_rewards = false;
  bool operator==(const VerificationSection&) const = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  DatasetConfig dataset;
  PartitionConfig partition;
  int num_sps = 9;
  AdversaryConfig adversary;
  QualityConfig quality;
  LearnerConfig learner;
  RadioConfig radio;
  ContractConfig contract;
  std::string scheme = "untrust";  // conventional | trust | untrust
  VerificationSection verification;
  bool shadow_run = false;
  std::size_t threads = 0;
  std::string output_dir = "fedpot_out";
  bool operator==(const ExperimentConfig&) const = default;
};

// Unknown keys, type mismatches and bound violations raise ConfigError.
// Seeds left out of the document are derived from the top-level seed.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig parse_config_file(const std::string& path,
                                   std::optional<std::uint64_t> seed_override = {});

// Fully resolved document; parse_config(to_json(c)) == c.
json to_json(const ExperimentConfig& cfg);

federation::AggregationScheme parse_scheme(const std::string& name);
std::string scheme_name(federation::AggregationScheme scheme);

// Loads/generates data, partitions it, scores quality, draws adversaries and
// radio parameters.
federation::ExperimentSetup build_setup(const ExperimentConfig& cfg);

// Menu file for the `verify` command: {"items": [{type, theta, reward, cost}]}.
contract::ContractMenu load_menu(const std::string& path);

}  // namespace fedpot::config
