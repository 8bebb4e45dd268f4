#include "exmart/simulate.hpp"

#include <cmath>
#include <numbers>

#include "exmart/rng.hpp"

namespace exmart {
namespace {

constexpr std::uint64_t kHyperplaneTag = 0x68797065ULL;  // "hype"
constexpr std::uint64_t kNdcTag = 0x6e646373ULL;         // "ndcs"
constexpr std::uint64_t kNoiseTag = 0x6e6f6973ULL;       // "nois"

void validateCommon(std::size_t segmentLen, std::size_t numSegments, double noisePct) {
  if (segmentLen < 1) throw ConfigError("stream config: segmentLen must be at least 1");
  if (numSegments < 1) throw ConfigError("stream config: numSegments must be at least 1");
  if (noisePct < 0.0 || noisePct >= 50.0) {
    throw ConfigError("stream config: noisePct must lie in [0, 50)");
  }
}

std::vector<std::uint64_t> changePointsFor(std::size_t segmentLen, std::size_t numSegments) {
  std::vector<std::uint64_t> changes;
  changes.reserve(numSegments - 1);
  for (std::size_t i = 1; i < numSegments; ++i) {
    changes.push_back(static_cast<std::uint64_t>(segmentLen) * i + 1);
  }
  return changes;
}

}  // namespace

void HyperplaneConfig::validate() const {
  if (m < 2) throw ConfigError("hyperplane config: dimension must be at least 2");
  if (rotationMode != RotationMode::RandomWeights && m != 2) {
    throw ConfigError("hyperplane config: angle-based rotation modes need dimension 2");
  }
  validateCommon(segmentLen, numSegments, noisePct);
}

void NdcConfig::validate() const {
  if (m < 1) throw ConfigError("cluster config: dimension must be at least 1");
  if (clustersPerClass < 1) throw ConfigError("cluster config: clustersPerClass must be at least 1");
  validateCommon(segmentLen, numSegments, noisePct);
}

int hyperplaneLabel(const std::vector<double>& x, const std::vector<double>& w, double c) {
  if (x.size() != w.size()) {
    throw ConfigError("hyperplaneLabel: dimension mismatch");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += w[i] * x[i];
  return dot >= c ? 1 : -1;
}

StreamSpec generateHyperplaneStream(const HyperplaneConfig& cfg, std::uint64_t seed,
                                    std::vector<std::vector<double>>* weightsOut) {
  cfg.validate();
  Rng rng = Rng::derive(seed, kHyperplaneTag);
  StreamSpec stream;
  stream.points.reserve(cfg.segmentLen * cfg.numSegments);
  if (weightsOut) weightsOut->clear();

  for (std::size_t seg = 0; seg < cfg.numSegments; ++seg) {
    std::vector<double> w(cfg.m);
    if (cfg.rotationMode == RotationMode::RandomWeights) {
      for (auto& wi : w) wi = rng.uniform(-1.0, 1.0);
    } else {
      const double bound =
          cfg.rotationMode == RotationMode::Restricted ? std::numbers::pi / 3.0 : std::numbers::pi;
      const double r = rng.uniform(-bound, bound);
      w[0] = std::cos(r);
      w[1] = std::sin(r);
    }
    if (weightsOut) weightsOut->push_back(w);

    for (std::size_t i = 0; i < cfg.segmentLen; ++i) {
      LabeledPoint pt;
      pt.features.resize(cfg.m);
      for (auto& f : pt.features) f = rng.uniform(-1.0, 1.0);
      pt.label = hyperplaneLabel(pt.features, w, cfg.c);
      stream.points.push_back(std::move(pt));
    }
  }

  stream.trueChangePoints = changePointsFor(cfg.segmentLen, cfg.numSegments);
  return applyLabelNoise(std::move(stream), cfg.noisePct, seed);
}

StreamSpec generateNdcStream(const NdcConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = Rng::derive(seed, kNdcTag);
  StreamSpec stream;
  stream.points.reserve(cfg.segmentLen * cfg.numSegments);

  for (std::size_t seg = 0; seg < cfg.numSegments; ++seg) {
    // Class 0 is labeled +1, class 1 is labeled -1.
    std::vector<std::vector<double>> means(2 * cfg.clustersPerClass);
    std::vector<std::vector<double>> stds(2 * cfg.clustersPerClass);
    for (std::size_t cl = 0; cl < means.size(); ++cl) {
      means[cl].resize(cfg.m);
      stds[cl].resize(cfg.m);
      for (auto& v : means[cl]) v = rng.uniform(-2.0, 2.0);
      for (auto& v : stds[cl]) v = rng.uniform(0.3, 1.0);
    }

    const std::size_t segStart = stream.points.size();
    for (std::size_t i = 0; i < cfg.segmentLen; ++i) {
      const std::uint64_t cls = rng.below(2);
      const std::uint64_t cluster = rng.below(cfg.clustersPerClass);
      const std::size_t idx = cls * cfg.clustersPerClass + cluster;
      LabeledPoint pt;
      pt.features.resize(cfg.m);
      for (std::size_t d = 0; d < cfg.m; ++d) {
        pt.features[d] = rng.normal(means[idx][d], stds[idx][d]);
      }
      pt.label = cls == 0 ? 1 : -1;
      stream.points.push_back(std::move(pt));
    }

    for (std::size_t d = 0; d < cfg.m; ++d) {
      double lo = stream.points[segStart].features[d];
      double hi = lo;
      for (std::size_t i = segStart; i < stream.points.size(); ++i) {
        lo = std::min(lo, stream.points[i].features[d]);
        hi = std::max(hi, stream.points[i].features[d]);
      }
      for (std::size_t i = segStart; i < stream.points.size(); ++i) {
        double& f = stream.points[i].features[d];
        f = hi > lo ? 2.0 * (f - lo) / (hi - lo) - 1.0 : 0.0;
      }
    }
  }

  stream.trueChangePoints = changePointsFor(cfg.segmentLen, cfg.numSegments);
  return applyLabelNoise(std::move(stream), cfg.noisePct, seed);
}

StreamSpec applyLabelNoise(StreamSpec stream, double pct, std::uint64_t seed) {
  if (pct < 0.0 || pct >= 50.0) {
    throw ConfigError("applyLabelNoise: pct must lie in [0, 50)");
  }
  const std::size_t n = stream.points.size();
  const auto flips = static_cast<std::size_t>(std::llround(pct / 100.0 * static_cast<double>(n)));
  if (flips == 0) return stream;

  Rng rng = Rng::derive(seed, kNoiseTag);
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  for (std::size_t i = 0; i < flips; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(indices[i], indices[j]);
    stream.points[indices[i]].label = -stream.points[indices[i]].label;
  }
  return stream;
}

}  // namespace exmart
