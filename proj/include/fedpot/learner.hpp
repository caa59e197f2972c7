#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "fedpot/dataset.hpp"

namespace fedpot::learner {

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  // Start of this layer's block: out*in row-major weights, then out biases.
  std::size_t offset = 0;
};

// Rectifier hidden layers, softmax output.
struct MlpArchitecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_sizes;
  int num_classes = 0;

  std::vector<LayerShape> layers() const;
  std::size_t parameter_count() const;
  void validate() const;

  bool operator==(const MlpArchitecture&) const = default;
};

// [115, 62, 32] at d = 115, otherwise [d, ceil(d/2), ceil(d/4)].
std::vector<std::size_t> default_hidden_sizes(std::size_t input_dim);

struct ParameterVector {
  MlpArchitecture arch;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool same_layout(const ParameterVector& other) const { return arch == other.arch; }
};

struct TrainingConfig {
  int epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  ParameterVector params;
  std::size_t update_count = 0;
};

struct EvalMetrics {
  double accuracy = 0.0;
  // Unset when the evaluation set lacks the class the rate conditions on.
  std::optional<double> tprate;
  std::optional<double> tnr;
  std::optional<double> f1;
  double loss = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

ParameterVector init_params(const MlpArchitecture& arch, std::uint64_t seed);

std::vector<double> predict_proba(const ParameterVector& params, std::span<const double> x);
int predict(const ParameterVector& params, std::span<const double> x);

// Mean cross-entropy over the selected rows; when `grad` is non-null it is
// resized and filled with the gradient of that mean.
double loss_and_gradient(const ParameterVector& params, const LabeledDataset& ds,
                         std::span<const std::size_t> rows, std::vector<double>* grad);

double mean_loss(const ParameterVector& params, const LabeledDataset& ds);

TrainResult local_train(const ParameterVector& params, const LabeledDataset& ds,
                        const TrainingConfig& cfg);

EvalMetrics evaluate(const ParameterVector& params, const LabeledDataset& ds,
                     const std::set<int>& positive_labels);

// Multi-class accuracy only; skips the loss and confusion bookkeeping.
double accuracy(const ParameterVector& params, const LabeledDataset& ds);

double param_distance(const ParameterVector& a, const ParameterVector& b);

}  // namespace fedpot::learner
