#include "exmart/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace exmart {
namespace {

double quantileType7(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

std::vector<double> positiveLogs(const std::vector<std::uint64_t>& delays, std::size_t& excluded) {
  std::vector<double> logs;
  logs.reserve(delays.size());
  excluded = 0;
  for (std::uint64_t d : delays) {
    if (d == 0) {
      ++excluded;
    } else {
      logs.push_back(std::log(static_cast<double>(d)));
    }
  }
  return logs;
}

void meanVar(const std::vector<double>& xs, double& mean, double& var) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
}

}  // namespace

MatchResult matchDetections(const std::vector<std::uint64_t>& detections,
                            const std::vector<std::uint64_t>& trueChanges,
                            std::uint64_t streamLen) {
  if (!std::is_sorted(detections.begin(), detections.end()) ||
      !std::is_sorted(trueChanges.begin(), trueChanges.end())) {
    throw std::invalid_argument("matchDetections: inputs must be sorted ascending");
  }
  for (std::uint64_t t : detections) {
    if (t < 1 || t > streamLen) {
      throw std::invalid_argument("matchDetections: detection index outside the stream");
    }
  }

  MatchResult result;
  std::vector<bool> matched(trueChanges.size(), false);
  for (std::uint64_t t : detections) {
    const auto it = std::upper_bound(trueChanges.begin(), trueChanges.end(), t);
    if (it == trueChanges.begin()) {
      result.falseAlarms.push_back(t);
      continue;
    }
    const auto idx = static_cast<std::size_t>(it - trueChanges.begin()) - 1;
    if (matched[idx]) {
      result.falseAlarms.push_back(t);
      continue;
    }
    matched[idx] = true;
    result.correctDetections.push_back(t);
    result.delays.push_back(t - trueChanges[idx]);
  }
  for (bool m : matched) {
    if (!m) ++result.missed;
  }
  return result;
}

DelayStats summarizeDelays(const std::vector<std::uint64_t>& delays) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  DelayStats stats{nan, nan, nan, nan, nan, nan};
  if (delays.empty()) return stats;
  std::vector<double> sorted(delays.begin(), delays.end());
  std::sort(sorted.begin(), sorted.end());
  stats.min = sorted.front();
  stats.q1 = quantileType7(sorted, 0.25);
  stats.median = quantileType7(sorted, 0.5);
  stats.q3 = quantileType7(sorted, 0.75);
  stats.max = sorted.back();
  double sum = 0.0;
  for (double d : sorted) sum += d;
  stats.mean = sum / static_cast<double>(sorted.size());
  return stats;
}

KsResult ksUniformTest(std::vector<double> samples) {
  if (samples.size() < 5) {
    throw std::invalid_argument("ksUniformTest: need at least 5 samples");
  }
  for (double x : samples) {
    if (!(x >= 0.0) || !(x <= 1.0)) {
      throw std::invalid_argument("ksUniformTest: samples must lie in [0, 1]");
    }
  }
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / n - samples[i];
    const double lo = samples[i] - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }

  const double lambdaStar = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) *
                                 lambdaStar * lambdaStar);
    sum += sign * term;
    if (term < 1e-10) {
      p = std::clamp(2.0 * sum, 0.0, 1.0);
      break;
    }
    sign = -sign;
  }
  return {d, p, samples.size()};
}

WelchResult welchTTestLogDelays(const std::vector<std::uint64_t>& delaysA,
                                const std::vector<std::uint64_t>& delaysB) {
  WelchResult result;
  const auto logsA = positiveLogs(delaysA, result.excludedA);
  const auto logsB = positiveLogs(delaysB, result.excludedB);
  if (logsA.size() < 2 || logsB.size() < 2) {
    throw std::invalid_argument(
        "welchTTestLogDelays: each group needs at least 2 positive delays");
  }
  double meanA = 0.0, varA = 0.0, meanB = 0.0, varB = 0.0;
  meanVar(logsA, meanA, varA);
  meanVar(logsB, meanB, varB);
  const auto na = static_cast<double>(logsA.size());
  const auto nb = static_cast<double>(logsB.size());
  const double se2 = varA / na + varB / nb;

  if (se2 == 0.0) {
    result.df = na + nb - 2.0;
    if (meanA == meanB) {
      result.t = 0.0;
      result.pValue = 1.0;
    } else {
      result.t = meanA > meanB ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      result.pValue = 0.0;
    }
    return result;
  }

  result.t = (meanA - meanB) / std::sqrt(se2);
  result.df = se2 * se2 /
              ((varA / na) * (varA / na) / (na - 1.0) + (varB / nb) * (varB / nb) / (nb - 1.0));
  const boost::math::students_t dist(result.df);
  result.pValue = 2.0 * boost::math::cdf(dist, -std::abs(result.t));
  return result;
}

std::string EvalReport::toKeyValue() const {
  std::ostringstream out;
  out.precision(17);
  out << "precision = " << precision << '\n'
      << "recall = " << recall << '\n'
      << "numTrueChanges = " << numTrueChanges << '\n'
      << "numDetections = " << numDetections << '\n'
      << "correct = " << correct << '\n'
      << "falseAlarms = " << falseAlarms << '\n'
      << "missed = " << missed << '\n'
      << "delayMin = " << delayStats.min << '\n'
      << "delayQ1 = " << delayStats.q1 << '\n'
      << "delayMedian = " << delayStats.median << '\n'
      << "delayQ3 = " << delayStats.q3 << '\n'
      << "delayMax = " << delayStats.max << '\n'
      << "delayMean = " << delayStats.mean << '\n';
  if (hasKs) {
    out << "ksStatistic = " << ksStatistic << '\n' << "ksPValue = " << ksPValue << '\n';
  }
  return out.str();
}

EvalReport buildReport(const MatchResult& match, std::uint64_t numTrueChanges,
                       const std::optional<KsResult>& ks) {
  EvalReport report;
  report.correct = match.correctDetections.size();
  report.falseAlarms = match.falseAlarms.size();
  report.missed = match.missed;
  report.numTrueChanges = numTrueChanges;
  report.numDetections = report.correct + report.falseAlarms;
  report.delays = match.delays;
  report.delayStats = summarizeDelays(match.delays);
  report.precision = report.numDetections > 0
                         ? static_cast<double>(report.correct) /
                               static_cast<double>(report.numDetections)
                         : 1.0;
  report.recall = numTrueChanges > 0
                      ? static_cast<double>(report.correct) / static_cast<double>(numTrueChanges)
                      : 1.0;
  if (ks) {
    report.hasKs = true;
    report.ksStatistic = ks->d;
    report.ksPValue = ks->pValue;
  }
  return report;
}

}  // namespace exmart
