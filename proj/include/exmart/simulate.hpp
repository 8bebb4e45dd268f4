#pragma once

#include <cstddef>
#include <vector>

#include "exmart/types.hpp"

namespace exmart {

enum class RotationMode {
  Restricted,     ///< per-segment angle uniform in [-pi/3, pi/3]; 2-D only
  Arbitrary,      ///< per-segment angle uniform in [-pi, pi]; 2-D only
  RandomWeights,  ///< each weight uniform in [-1, 1]; any dimension
};

struct HyperplaneConfig {
  std::size_t m = 2;
  double c = 0.0;
  std::size_t segmentLen = 1000;
  std::size_t numSegments = 100;
  RotationMode rotationMode = RotationMode::Restricted;
  double noisePct = 0.0;

  void validate() const;
};

struct NdcConfig {
  std::size_t m = 10;
  std::size_t clustersPerClass = 2;
  std::size_t segmentLen = 1000;
  std::size_t numSegments = 100;
  double noisePct = 0.0;

  void validate() const;
};

/// Sign of w.x - c: +1 when w.x >= c, else -1.
int hyperplaneLabel(const std::vector<double>& x, const std::vector<double>& w, double c);

/// Stream of numSegments blocks of uniform points in [-1,1]^m, each block
/// labeled by a freshly drawn hyperplane, with label noise applied last.
/// When weightsOut is non-null it receives each segment's weight vector.
StreamSpec generateHyperplaneStream(const HyperplaneConfig& cfg, std::uint64_t seed,
                                    std::vector<std::vector<double>>* weightsOut = nullptr);

/// Stream of numSegments blocks drawn from per-class Gaussian clusters with
/// fresh means and spreads per block, each block rescaled per dimension to
/// [-1,1], with label noise applied last.
StreamSpec generateNdcStream(const NdcConfig& cfg, std::uint64_t seed);

/// Negates the labels of exactly round(pct/100 * n) distinct points chosen
/// uniformly. Applying it twice with the same seed restores the input.
StreamSpec applyLabelNoise(StreamSpec stream, double pct, std::uint64_t seed);

}  // namespace exmart
