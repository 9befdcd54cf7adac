#pragma once

#include <utility>
#include <vector>

#include "morphocad/eval.hpp"

namespace testsupport {

/// Features 1..3 carry shifts of 1.2, 0.9 and 0.6 standard deviations between
/// classes; 4..10 are pure noise; 11..30 are missing.
morphocad::eval::Dataset informative_dataset(int benign, int malignant, unsigned seed);

/// Coded BI-RADS only, one lesion per count of the category-by-outcome table.
morphocad::eval::Dataset birads_count_dataset();

/// Best LOOCV AUC over every non-empty subset of `ids`.
std::pair<double, std::vector<int>> exhaustive_best(const morphocad::eval::Dataset& data,
                                                    const std::vector<int>& ids);

}  // namespace testsupport
