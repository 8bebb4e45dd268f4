#pragma once

#include <span>

#include "exmart/types.hpp"

namespace exmart {

/// Tie-randomization draws are clamped to this band so a p-value can never
/// reach 0 or 1 exactly and no single martingale update factor is unbounded.
inline constexpr double kThetaMin = 1e-6;
inline constexpr double kThetaMax = 1.0 - 1e-6;

/// Randomized conformal p-value of the newest score in a bag.
///
/// The last element of `scores` is the new point's score alpha_n. Returns
///   (#{alpha_i > alpha_n} + theta * #{alpha_i = alpha_n}) / n
/// which lies in (0, 1] because the new point always ties itself.
/// Throws std::invalid_argument on an empty bag or theta outside (0, 1).
PValue computePValue(std::span<const StrangenessScore> scores, double theta);

}  // namespace exmart
