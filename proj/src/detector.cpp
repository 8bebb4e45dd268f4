#include "exmart/detector.hpp"

#include <algorithm>
#include <cmath>

#include "exmart/martingale.hpp"
#include "exmart/pvalue.hpp"

namespace exmart {

namespace {
constexpr std::uint64_t kChannelTag = 0x6368616eULL;  // "chan"
}

Detector::Detector(DetectorConfig cfg, std::unique_ptr<StrangenessProvider> provider, int channel)
    : cfg_(cfg),
      provider_(std::move(provider)),
      fallback_(1),
      channel_(channel),
      rng_(cfg.seed),
      logLambda_(std::log(cfg.lambda)) {
  cfg_.validate();
  if (!provider_) provider_ = std::make_unique<KnnProvider>(1);
}

void Detector::reset() {
  bag_.clear();
  provider_->reset();
  fallback_.reset();
  logM_ = 0.0;
}

std::optional<DetectionEvent> Detector::step(const LabeledPoint& point) {
  ++seen_;
  scratch_ = bag_;
  scratch_.push_back(point);

  auto scores = provider_->score(scratch_);
  if (!scores) scores = fallback_.score(scratch_);

  // Drawn whether or not the provider fell back, so the theta sequence per
  // point index is independent of provider behavior.
  const double theta = std::clamp(rng_.uniform(), kThetaMin, kThetaMax);
  const PValue p = computePValue(*scores, theta);
  logM_ += logUpdateFactor(p, cfg_.epsilon);
  lastP_ = p;
  lastTested_ = logM_;

  if (logM_ >= logLambda_) {
    DetectionEvent event{seen_, logM_, channel_};
    reset();
    return event;
  }

  bag_.push_back(point);
  if (cfg_.windowCap && bag_.size() > *cfg_.windowCap) {
    bag_.erase(bag_.begin());
  }
  return std::nullopt;
}

std::uint64_t MultiChannelDetector::channelSeed(std::uint64_t seed, std::size_t channelIdx) {
  return Rng::deriveSeed(seed, kChannelTag, channelIdx);
}

MultiChannelDetector::MultiChannelDetector(std::vector<int> labels, DetectorConfig cfg,
                                           const ProviderFactory& makeProvider)
    : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  if (labels_.size() < 2) {
    throw ConfigError("MultiChannelDetector: need at least two distinct labels");
  }
  channels_.reserve(labels_.size());
  for (std::size_t idx = 0; idx < labels_.size(); ++idx) {
    DetectorConfig channelCfg = cfg;
    channelCfg.seed = channelSeed(cfg.seed, idx);
    channels_.emplace_back(channelCfg, makeProvider(), labels_[idx]);
  }
}

void MultiChannelDetector::resetAll() {
  for (auto& ch : channels_) ch.reset();
}

std::optional<DetectionEvent> MultiChannelDetector::step(const LabeledPoint& point) {
  if (!std::binary_search(labels_.begin(), labels_.end(), point.label)) {
    throw ParseError("MultiChannelDetector: unknown label " + std::to_string(point.label));
  }
  std::optional<DetectionEvent> winner;
  for (std::size_t idx = 0; idx < channels_.size(); ++idx) {
    LabeledPoint relabeled = point;
    relabeled.label = point.label == labels_[idx] ? 1 : -1;
    auto event = channels_[idx].step(relabeled);
    if (event && !winner) winner = event;
  }
  if (winner) resetAll();
  return winner;
}

}  // namespace exmart
