#pragma once

// Reference computations kept independent of the library code paths they
// check: all-pairs coverage integration, exhaustive subset search and
// central finite differences.

#include <cstddef>
#include <vector>

#include "fedpot/contract.hpp"
#include "fedpot/dataset.hpp"
#include "fedpot/learner.hpp"

namespace fedpot::oracle {

// Exact integral of the closed-ball coverage step function over [0, sqrt(d)],
// divided by sqrt(d). Empty local gives 0.
double exact_quality(const LabeledDataset& local, const LabeledDataset& reference);

// Best objective over every subset that respects budget and deadline.
double best_selection_objective(const std::vector<contract::Candidate>& candidates, double budget,
                                double deadline);

// Central-difference gradient of the mean loss over all rows of `ds`.
std::vector<double> finite_difference_gradient(const learner::ParameterVector& params,
                                               const LabeledDataset& ds, double step);

}  // namespace fedpot::oracle
