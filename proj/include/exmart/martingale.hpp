#pragma once

#include <span>

#include "exmart/types.hpp"

namespace exmart {

/// Natural log of the power-martingale update factor eps * p^(eps-1).
/// Kept in log space; the direct product over thousands of points would
/// overflow or underflow.
double logUpdateFactor(PValue p, double epsilon);

/// The update factor itself, eps * p^(eps-1) >= eps.
double updateFactor(PValue p, double epsilon);

/// Threshold upper bound (1 - beta) / alpha for a test of the given size
/// and power.
double thresholdFromDesign(const TestDesign& design);

/// min(1, 1/lambda): the false-alarm probability bound for a unit-mean
/// nonnegative martingale crossing lambda. Requires lambda > 0.
double doobFalseAlarmBound(double lambda);

/// Mean-log growth per point below this value is treated as "no change
/// signal" by estimateMeanDelay. Nonzero so that p-value samples sitting at
/// the published 5-decimal crossover (0.35265 at epsilon 0.92, where the
/// exact per-point growth is ~7.3e-7) map to the undefined-delay case.
inline constexpr double kMeanLogGrowthTol = 1e-6;

/// Estimated mean detection delay (1 - beta) * ln(lambda) / mean(L) where
/// L_i = ln(eps * p_i^(eps-1)) over the supplied post-change p-value sample.
/// Throws std::domain_error when mean(L) <= kMeanLogGrowthTol ("p-value
/// distribution does not indicate a change"). Requires lambda >= 1.
double estimateMeanDelay(double lambda, double beta, std::span<const PValue> postChangePValues,
                         double epsilon);

}  // namespace exmart
