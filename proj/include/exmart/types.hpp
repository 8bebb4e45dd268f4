#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace exmart {

/// One observation of a labeled stream: real-valued features plus an
/// integer class label (-1/+1 for binary streams).
struct LabeledPoint {
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

/// Nonconformity score. Finite and >= 0; only the ordering of scores
/// within one bag carries meaning.
using StrangenessScore = double;

/// Randomized conformal p-value, strictly inside (0, 1].
using PValue = double;

struct DetectorConfig {
  double epsilon = 0.92;                 // martingale exponent, in (0,1)
  double lambda = 10.0;                  // detection threshold, > 1
  std::optional<std::size_t> windowCap;  // max bag size; unbounded if unset
  std::uint64_t seed = 0;
  std::size_t retrainEvery = 1;          // classifier retraining cadence

  void validate() const;
};

/// Emitted when the martingale crosses the threshold.
struct DetectionEvent {
  std::uint64_t index = 0;     // 1-based global point index at the crossing
  double logMartingale = 0.0;  // natural log of M at the crossing, >= log(lambda)
  int channel = 0;             // class id; binary streams use the positive class
};

/// Size/power pair for sizing the threshold.
struct TestDesign {
  double alpha = 0.05;  // size of the test, in (0,1)
  double beta = 0.0;    // type-II error probability, in [0,1)

  void validate() const;
};

/// A labeled stream together with its ground-truth change points
/// (1-based index of the first point of each new concept).
struct StreamSpec {
  std::vector<LabeledPoint> points;
  std::vector<std::uint64_t> trueChangePoints;
};

/// Invalid or mutually inconsistent configuration. CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or insufficient input data. CLI exit code 2.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace exmart
