#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lotenet {

/// Area under the ROC curve for positive-class scores against binary labels.
/// Mann-Whitney rank formulation with midranks for ties, which is exactly
/// the trapezoidal ROC area. Needs at least one label of each class.
double auc_roc(std::span<const double> scores, std::span<const std::size_t> labels);

/// Fraction of positions where prediction equals label.
double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

/// classes x classes counts, row-major; rows are the true class, columns the
/// predicted class.
std::vector<std::size_t> confusion(std::span<const std::size_t> predictions,
                                   std::span<const std::size_t> labels, std::size_t classes);

}  // namespace lotenet
