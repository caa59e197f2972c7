#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fedpot {

struct Sample {
  std::vector<double> features;
  int label = 0;
};

// Feature rows plus dense integer labels in [0, num_classes).
struct LabeledDataset {
  std::vector<Sample> samples;
  int num_classes = 0;
  std::size_t dimension = 0;
  // Optional human-readable class names, indexed by label id.
  std::vector<std::string> label_names;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  // Throws std::invalid_argument if any sample breaks the dimension/label
  // invariants.
  void validate() const;

  // Same metadata, no samples.
  LabeledDataset empty_like() const;

  std::vector<std::size_t> label_histogram() const;
};

struct MinMaxRecord {
  std::vector<double> min;
  std::vector<double> max;

  // Maps held-out data with the recorded ranges; results are clamped to [0,1].
  LabeledDataset apply(const LabeledDataset& ds) const;
};

struct NormalizedDataset {
  LabeledDataset data;
  MinMaxRecord record;
};

enum class PartitionMode { Iid, NonIid };

struct PartitionPlan {
  std::size_t num_clients = 1;
  PartitionMode mode = PartitionMode::Iid;
  std::size_t max_classes_per_client = 2;
  // Label treated as background traffic in NonIID mode.
  int benign_label = 0;
  std::uint64_t seed = 0;
};

struct SyntheticSpec {
  std::size_t dimension = 2;
  int num_classes = 2;
  std::size_t per_class = 50;
  double spread = 0.1;
  std::uint64_t seed = 0;

  bool operator==(const SyntheticSpec&) const = default;
};

struct HoldoutSplit {
  LabeledDataset train;
  LabeledDataset test;
};

LabeledDataset load_csv(const std::string& path,
                        const std::string& label_column = "label");

// Remaps the labels of several datasets (e.g. one CSV per device) onto one
// shared id space, ordered by first appearance across the list.
void harmonize_labels(std::vector<LabeledDataset>& parts);

NormalizedDataset normalize_minmax(const LabeledDataset& ds);

std::vector<LabeledDataset> partition(const LabeledDataset& ds,
                                      const PartitionPlan& plan);

HoldoutSplit holdout_split(const LabeledDataset& ds, double fraction,
                           std::uint64_t seed);

LabeledDataset generate_synthetic(const SyntheticSpec& spec);

// Deterministic uniform subsample of at most `count` rows, original order kept.
LabeledDataset subsample(const LabeledDataset& ds, std::size_t count,
                         std::uint64_t seed);

LabeledDataset concatenate(const std::vector<LabeledDataset>& parts);

}  // namespace fedpot
