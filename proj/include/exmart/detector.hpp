#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "exmart/rng.hpp"
#include "exmart/strangeness.hpp"
#include "exmart/types.hpp"

namespace exmart {

/// Online change detector over a single +1/-1 stream. Each arriving point is
/// scored against the current bag plus itself, converted to a randomized
/// p-value, and folded into a power martingale kept in log space. Crossing
/// lambda emits an event and restarts from an empty bag and unit martingale;
/// the triggering point is discarded with the rest of the bag.
class Detector {
 public:
  Detector(DetectorConfig cfg, std::unique_ptr<StrangenessProvider> provider,
           int channel = 1);

  /// Processes one point; returns an event when the martingale crosses
  /// lambda at this point.
  std::optional<DetectionEvent> step(const LabeledPoint& point);

  /// Drops bag, provider state, and martingale; the stream position counter
  /// keeps running.
  void reset();

  double logMartingale() const { return logM_; }
  std::uint64_t pointsSeen() const { return seen_; }
  const std::vector<LabeledPoint>& bag() const { return bag_; }

  /// p-value and post-update log martingale of the most recent step, kept
  /// even when the step ended in a detection and reset.
  PValue lastPValue() const { return lastP_; }
  double lastTestedLogMartingale() const { return lastTested_; }

 private:
  DetectorConfig cfg_;
  std::unique_ptr<StrangenessProvider> provider_;
  KnnProvider fallback_;
  int channel_;
  Rng rng_;
  double logLambda_;
  std::vector<LabeledPoint> bag_;
  std::vector<LabeledPoint> scratch_;
  double logM_ = 0.0;
  std::uint64_t seen_ = 0;
  PValue lastP_ = 0.0;
  double lastTested_ = 0.0;
};

/// One-vs-rest detector bank for streams with more than two classes. Every
/// point is relabeled +1 against each channel's class and -1 against the
/// rest, and all channels advance on every point. When several channels
/// cross at once the lowest class id wins, and every channel restarts.
class MultiChannelDetector {
 public:
  using ProviderFactory = std::function<std::unique_ptr<StrangenessProvider>()>;

  MultiChannelDetector(std::vector<int> labels, DetectorConfig cfg,
                       const ProviderFactory& makeProvider);

  /// Seed given to the detector of the channel at the given index (labels
  /// sorted ascending), for reproducing one channel standalone.
  static std::uint64_t channelSeed(std::uint64_t seed, std::size_t channelIdx);

  std::optional<DetectionEvent> step(const LabeledPoint& point);
  void resetAll();

  const std::vector<int>& labels() const { return labels_; }
  const Detector& channel(std::size_t idx) const { return channels_[idx]; }
  std::size_t channelCount() const { return channels_.size(); }

 private:
  std::vector<int> labels_;
  std::vector<Detector> channels_;
};

}  // namespace exmart
