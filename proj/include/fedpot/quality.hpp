#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedpot/dataset.hpp"

namespace fedpot::quality {

// Coverage of a reference set by closed balls of radius delta around the
// local samples, sampled on an even grid of radii over [0, sqrt(d)].
struct CoverageCurve {
  std::vector<double> deltas;
  std::vector<double> coverage;
};

enum class ReferenceMode { Pooled, UniformReference };

struct QualityEstimate {
  double phi = 0.0;
  std::size_t grid_points = 0;
  ReferenceMode reference_mode = ReferenceMode::Pooled;
  std::size_t reference_size = 0;
};

struct QualitySettings {
  std::size_t grid_points = 64;
  ReferenceMode reference_mode = ReferenceMode::Pooled;
  // Only used by UniformReference.
  std::size_t reference_size = 1000;
  std::uint64_t seed = 0;
};

// Distance from every reference point to its nearest local point; +inf for
// each entry when `local` is empty.
std::vector<double> nearest_local_distances(const LabeledDataset& local,
                                            const LabeledDataset& reference);

double ball_coverage(const LabeledDataset& local, const LabeledDataset& reference,
                     double delta);

CoverageCurve coverage_curve(const LabeledDataset& local,
                             const LabeledDataset& reference, std::size_t grid_points);

// Trapezoidal integral of the coverage curve, normalized by sqrt(d).
QualityEstimate vdd_quality(const LabeledDataset& local,
                            const LabeledDataset& reference, std::size_t grid_points);

// Bracket index m in [1, num_types] with phi in [(m-1)/M, m/M); phi = 1 maps to M.
int assign_type(double phi, int num_types);

// N uniform points in [0,1]^d shared by every client that uses the same seed.
LabeledDataset uniform_reference(std::size_t dimension, std::size_t count,
                                 std::uint64_t seed);

}  // namespace fedpot::quality
