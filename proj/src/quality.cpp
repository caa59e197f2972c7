#include "fedpot/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fedpot/rng.hpp"

namespace fedpot::quality {

namespace {

void check_dimensions(const LabeledDataset& local, const LabeledDataset& reference) {
  if (reference.empty()) throw std::invalid_argument("quality: reference set is empty");
  if (!local.empty() && local.dimension != reference.dimension)
    throw std::invalid_argument("quality: dimension mismatch (local " + std::to_string(local.dimension) +
                                ", reference " + std::to_string(reference.dimension) + ")");
}

double fraction_within(const std::vector<double>& sorted_dist, double delta) {
  const auto covered = std::upper_bound(sorted_dist.begin(), sorted_dist.end(), delta) - sorted_dist.begin();
  return static_cast<double>(covered) / static_cast<double>(sorted_dist.size());
}

std::vector<double> sorted_distances(const LabeledDataset& local, const LabeledDataset& reference) {
  auto d = nearest_local_distances(local, reference);
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

std::vector<double> nearest_local_distances(const LabeledDataset& local, const LabeledDataset& reference) {
  check_dimensions(local, reference);
  std::vector<double> out(reference.size(), std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < reference.size(); ++r) {
    const auto& x = reference.samples[r].features;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : local.samples) {
      double acc = 0.0;
      for (std::size_t j = 0; j < x.size() && acc < best; ++j) {
        const double diff = x[j] - s.features[j];
        acc += diff * diff;
      }
      best = std::min(best, acc);
    }
    out[r] = std::sqrt(best);
  }
  return out;
}

double ball_coverage(const LabeledDataset& local, const LabeledDataset& reference, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("ball_coverage: delta must be >= 0");
  check_dimensions(local, reference);
  if (local.empty()) return 0.0;
  return fraction_within(sorted_distances(local, reference), delta);
}

CoverageCurve coverage_curve(const LabeledDataset& local, const LabeledDataset& reference, std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("coverage_curve: need at least 2 grid points");
  check_dimensions(local, reference);
  const double upper = std::sqrt(static_cast<double>(reference.dimension));
  const auto dist = sorted_distances(local, reference);

  CoverageCurve curve;
  curve.deltas.resize(grid_points);
  curve.coverage.resize(grid_points);
  for (std::size_t k = 0; k < grid_points; ++k) {
    // Pin the last radius to sqrt(d) exactly so the closed-ball endpoint holds.
    const double delta = k + 1 == grid_points
                             ? upper
                             : upper * static_cast<double>(k) / static_cast<double>(grid_points - 1);
    curve.deltas[k] = delta;
    curve.coverage[k] = local.empty() ? 0.0 : fraction_within(dist, delta);
  }
  return curve;
}

QualityEstimate vdd_quality(const LabeledDataset& local, const LabeledDataset& reference, std::size_t grid_points) {
  const auto curve = coverage_curve(local, reference, grid_points);
  const std::size_t k = curve.coverage.size();
  // Even grid: integral / sqrt(d) = (sum - (first + last) / 2) / (K - 1).
  double sum = 0.0;
  for (double c : curve.coverage) sum += c;
  sum -= 0.5 * (curve.coverage.front() + curve.coverage.back());
  QualityEstimate est;
  est.phi = std::clamp(sum / static_cast<double>(k - 1), 0.0, 1.0);
  est.grid_points = grid_points;
  est.reference_size = reference.size();
  return est;
}

int assign_type(double phi, int num_types) {
  if (num_types < 1) throw std::invalid_argument("assign_type: num_types must be >= 1");
  if (!(phi >= 0.0 && phi <= 1.0))
    throw std::invalid_argument("assign_type: phi " + std::to_string(phi) + " outside [0,1]");
  const int m = static_cast<int>(std::floor(phi * num_types)) + 1;
  return std::min(m, num_types);
}

LabeledDataset uniform_reference(std::size_t dimension, std::size_t count, std::uint64_t seed) {
  if (dimension == 0 || count == 0)
    throw std::invalid_argument("uniform_reference: dimension and count must be positive");
  Rng rng(derive_seed(seed, {0x7ef}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LabeledDataset ref;
  ref.dimension = dimension;
  ref.num_classes = 1;
  ref.samples.resize(count);
  for (auto& s : ref.samples) {
    s.features.resize(dimension);
    for (auto& v : s.features) v = unit(rng);
  }
  return ref;
}

}  // namespace fedpot::quality
