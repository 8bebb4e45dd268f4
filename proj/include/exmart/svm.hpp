#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "exmart/types.hpp"

namespace exmart {

struct SvmTrainConfig {
  double gamma = 0.0;  ///< Gaussian kernel width; 0 means 1/dimension.
  double c = 10.0;     ///< Soft-margin penalty.
  double tol = 1e-3;   ///< KKT stopping tolerance on the gradient gap.
  std::size_t maxIter = 0;  ///< 0 means max(200000, 100 * n).
};

/// Trained soft-margin classifier with a Gaussian kernel. Only support
/// vectors (nonzero coefficients) are retained.
struct SvmModel {
  std::vector<std::vector<double>> svX;
  std::vector<double> svCoef;  ///< alpha_i * y_i per support vector.
  double bias = 0.0;
  double gamma = 0.0;

  double decision(const std::vector<double>& x) const;
};

/// Sequential-minimal-optimization trainer with second-order working-set
/// selection. Labels must be +1 / -1. Returns nothing when the problem is
/// untrainable (fewer than two points, or a single class).
std::optional<SvmModel> trainSvm(const std::vector<LabeledPoint>& points,
                                 const SvmTrainConfig& cfg);

}  // namespace exmart
