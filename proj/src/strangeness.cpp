#include "exmart/strangeness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exmart {
namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

void KnnProvider::NeighborSet::consider(double d, std::size_t k) {
  if (nearest.size() == k) {
    if (d >= nearest.back()) return;
    nearest.pop_back();
  }
  nearest.insert(std::upper_bound(nearest.begin(), nearest.end(), d), d);
}

double KnnProvider::NeighborSet::sum() const {
  double s = 0.0;
  for (double d : nearest) s += d;
  return s;
}

KnnProvider::KnnProvider(std::size_t k) : k_(k) {
  if (k_ == 0) throw std::invalid_argument("KnnProvider: k must be positive");
}

void KnnProvider::reset() {
  mirror_.clear();
  same_.clear();
  other_.clear();
}

bool KnnProvider::isAppendOf(const std::vector<LabeledPoint>& bag) const {
  if (bag.size() != mirror_.size() + 1) return false;
  return std::equal(mirror_.begin(), mirror_.end(), bag.begin());
}

void KnnProvider::appendPoint(const LabeledPoint& pt) {
  same_.emplace_back();
  other_.emplace_back();
  const std::size_t idx = mirror_.size();
  for (std::size_t i = 0; i < mirror_.size(); ++i) {
    const double d = distance(mirror_[i].features, pt.features);
    const bool sameLabel = mirror_[i].label == pt.label;
    (sameLabel ? same_ : other_)[i].consider(d, k_);
    (sameLabel ? same_ : other_)[idx].consider(d, k_);
  }
  mirror_.push_back(pt);
}

void KnnProvider::rebuild(const std::vector<LabeledPoint>& bag) {
  reset();
  for (const auto& pt : bag) appendPoint(pt);
}

StrangenessScore KnnProvider::toScore(std::size_t i) const {
  if (same_[i].empty()) return 0.0;
  const double sameSum = same_[i].sum();
  if (sameSum == 0.0) return 0.0;
  if (other_[i].empty()) return kMaxStrangeness;
  const double otherSum = other_[i].sum();
  if (otherSum == 0.0) return kMaxStrangeness;
  return std::min(sameSum / otherSum, kMaxStrangeness);
}

std::optional<std::vector<StrangenessScore>> KnnProvider::score(
    const std::vector<LabeledPoint>& bag) {
  if (bag.empty()) return std::vector<StrangenessScore>{};
  if (isAppendOf(bag)) {
    appendPoint(bag.back());
  } else if (bag != mirror_) {
    rebuild(bag);
  }
  std::vector<StrangenessScore> scores(bag.size());
  for (std::size_t i = 0; i < bag.size(); ++i) scores[i] = toScore(i);
  return scores;
}

std::vector<StrangenessScore> knnStrangeness(const std::vector<LabeledPoint>& bag, std::size_t k) {
  KnnProvider provider(k);
  return *provider.score(bag);
}

SvmProvider::SvmProvider(SvmTrainConfig cfg, std::size_t retrainEvery)
    : cfg_(cfg), retrainEvery_(retrainEvery == 0 ? 1 : retrainEvery) {}

void SvmProvider::reset() {
  calls_ = 0;
  model_.reset();
}

std::optional<std::vector<StrangenessScore>> SvmProvider::score(
    const std::vector<LabeledPoint>& bag) {
  const bool needTrain = !model_ || (calls_ % retrainEvery_ == 0);
  ++calls_;
  if (needTrain) {
    model_ = trainSvm(bag, cfg_);
  }
  if (!model_) return std::nullopt;
  std::vector<StrangenessScore> raw(bag.size());
  double minRaw = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bag.size(); ++i) {
    const double y = bag[i].label > 0 ? 1.0 : -1.0;
    raw[i] = -y * model_->decision(bag[i].features);
    minRaw = std::min(minRaw, raw[i]);
  }
  for (auto& r : raw) r -= minRaw;
  return raw;
}

std::vector<StrangenessScore> svmStrangeness(const std::vector<LabeledPoint>& bag,
                                             const SvmTrainConfig& cfg) {
  SvmProvider provider(cfg);
  auto scores = provider.score(bag);
  if (!scores) {
    throw std::invalid_argument("svmStrangeness: bag must contain at least two points and both labels");
  }
  return *scores;
}

}  // namespace exmart
