#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fedpot::oracle {

double exact_quality(const LabeledDataset& local, const LabeledDataset& reference) {
  if (local.empty()) return 0.0;
  const double upper = std::sqrt(static_cast<double>(reference.dimension));
  // Full distance matrix, then row minima.
  std::vector<std::vector<double>> dist(reference.size(), std::vector<double>(local.size()));
  for (std::size_t r = 0; r < reference.size(); ++r)
    for (std::size_t l = 0; l < local.size(); ++l) {
      double sq = 0.0;
      for (std::size_t j = 0; j < reference.dimension; ++j) {
        const double diff = reference.samples[r].features[j] - local.samples[l].features[j];
        sq += diff * diff;
      }
      dist[r][l] = std::sqrt(sq);
    }
  // rho(delta) = (1/N) sum_r [nn_r <= delta]; its integral over [0, U] is
  // (1/N) sum_r (U - min(nn_r, U)).
  double integral = 0.0;
  for (const auto& row : dist) {
    const double nn = *std::min_element(row.begin(), row.end());
    integral += upper - std::min(nn, upper);
  }
  integral /= static_cast<double>(reference.size());
  return integral / upper;
}

double best_selection_objective(const std::vector<contract::Candidate>& candidates, double budget,
                                double deadline) {
  const std::size_t n = candidates.size();
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double cost = 0.0;
    double value = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1U)) continue;
      if (candidates[i].t_total > deadline) ok = false;
      cost += candidates[i].required_reward;
      value += candidates[i].phi;
    }
    if (ok && cost <= budget) best = std::max(best, value);
  }
  return best;
}

std::vector<double> finite_difference_gradient(const learner::ParameterVector& params, const LabeledDataset& ds,
                                               double step) {
  std::vector<double> grad(params.size());
  auto probe = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params.values[i];
    probe.values[i] = orig + step;
    const double up = learner::mean_loss(probe, ds);
    probe.values[i] = orig - step;
    const double down = learner::mean_loss(probe, ds);
    probe.values[i] = orig;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

}  // namespace fedpot::oracle
