#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exmart/types.hpp"

namespace exmart {

struct MatchResult {
  std::vector<std::uint64_t> correctDetections;
  std::vector<std::uint64_t> delays;  ///< per correct detection, in arrival order
  std::vector<std::uint64_t> falseAlarms;
  std::uint64_t missed = 0;
};

/// Classifies each detection against the ground truth: a detection is
/// correct when the latest true change at or before it is still unmatched
/// (one match per change, one change per detection window); everything else,
/// including repeats within an already-matched window, is a false alarm.
MatchResult matchDetections(const std::vector<std::uint64_t>& detections,
                            const std::vector<std::uint64_t>& trueChanges,
                            std::uint64_t streamLen);

struct DelayStats {
  double min, q1, median, q3, max, mean;  ///< all NaN when no delays
};

DelayStats summarizeDelays(const std::vector<std::uint64_t>& delays);

struct KsResult {
  double d = 0.0;
  double pValue = 1.0;
  std::size_t n = 0;
};

/// One-sample Kolmogorov test against the uniform distribution on [0,1]:
/// D is the two-sided sup gap between the ECDF and the identity, the p-value
/// the asymptotic alternating series with the small-sample size correction.
/// Needs at least 5 samples, all within [0,1].
KsResult ksUniformTest(std::vector<double> samples);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double pValue = 1.0;
  std::size_t excludedA = 0;  ///< zero delays dropped before taking logs
  std::size_t excludedB = 0;
};

/// Two-sided Welch t-test on natural-log delays with Welch-Satterthwaite
/// degrees of freedom. Zero delays are excluded (and counted); a group left
/// with fewer than two values is an error.
WelchResult welchTTestLogDelays(const std::vector<std::uint64_t>& delaysA,
                                const std::vector<std::uint64_t>& delaysB);

struct EvalReport {
  double precision = 1.0;
  double recall = 1.0;
  std::vector<std::uint64_t> delays;
  DelayStats delayStats{};
  std::uint64_t correct = 0;
  std::uint64_t falseAlarms = 0;
  std::uint64_t missed = 0;
  std::uint64_t numTrueChanges = 0;
  std::uint64_t numDetections = 0;
  double ksStatistic = 0.0;
  double ksPValue = 1.0;
  bool hasKs = false;

  std::string toKeyValue() const;
};

EvalReport buildReport(const MatchResult& match, std::uint64_t numTrueChanges,
                       const std::optional<KsResult>& ks);

}  // namespace exmart
