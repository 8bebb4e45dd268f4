#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "exmart/svm.hpp"
#include "exmart/types.hpp"

namespace exmart {

/// Returned when a point has same-label neighbors but no other-label point
/// to compare against (and as the cap for ratios that would exceed it).
inline constexpr StrangenessScore kMaxStrangeness = std::numeric_limits<double>::max() / 2.0;

/// Scores every point in the bag against the bag itself. A provider may
/// decline a bag it cannot score (returns nothing); the caller then falls
/// back to a distance-based score for that step. Providers may keep
/// incremental state keyed to the bag contents; reset() drops it.
class StrangenessProvider {
 public:
  virtual ~StrangenessProvider() = default;
  virtual std::optional<std::vector<StrangenessScore>> score(
      const std::vector<LabeledPoint>& bag) = 0;
  virtual void reset() = 0;
};

/// Ratio of summed distances to the k nearest same-label neighbors over the
/// k nearest other-label points. No same-label neighbor (or zero numerator)
/// scores 0; same-label neighbors but nothing of the other label scores
/// kMaxStrangeness. Appends to the previously scored bag update in O(n);
/// any other bag triggers a full rebuild.
class KnnProvider : public StrangenessProvider {
 public:
  explicit KnnProvider(std::size_t k = 1);

  std::optional<std::vector<StrangenessScore>> score(const std::vector<LabeledPoint>& bag) override;
  void reset() override;

 private:
  /// The k smallest distances seen, kept sorted ascending. Sums are taken
  /// over the sorted values at score time, so a score depends only on the
  /// multiset of distances, never on arrival order.
  struct NeighborSet {
    std::vector<double> nearest;

    void consider(double d, std::size_t k);
    double sum() const;
    bool empty() const { return nearest.empty(); }
  };

  bool isAppendOf(const std::vector<LabeledPoint>& bag) const;
  void rebuild(const std::vector<LabeledPoint>& bag);
  void appendPoint(const LabeledPoint& pt);
  StrangenessScore toScore(std::size_t i) const;

  std::size_t k_;
  std::vector<LabeledPoint> mirror_;
  std::vector<NeighborSet> same_;
  std::vector<NeighborSet> other_;
};

/// One-shot kNN scoring of a whole bag.
std::vector<StrangenessScore> knnStrangeness(const std::vector<LabeledPoint>& bag, std::size_t k = 1);

/// Negated signed decision values of a soft-margin Gaussian-kernel
/// classifier trained on the bag, shifted so the minimum is zero. Declines
/// bags the trainer cannot fit (single class, fewer than two points).
/// Retrains every retrainEvery-th call since construction or reset and
/// reuses the cached model in between.
class SvmProvider : public StrangenessProvider {
 public:
  explicit SvmProvider(SvmTrainConfig cfg = {}, std::size_t retrainEvery = 1);

  std::optional<std::vector<StrangenessScore>> score(const std::vector<LabeledPoint>& bag) override;
  void reset() override;

 private:
  SvmTrainConfig cfg_;
  std::size_t retrainEvery_;
  std::size_t calls_ = 0;
  std::optional<SvmModel> model_;
};

/// One-shot classifier-based scoring of a whole bag. Throws
/// std::invalid_argument when the bag cannot be fit.
std::vector<StrangenessScore> svmStrangeness(const std::vector<LabeledPoint>& bag,
                                             const SvmTrainConfig& cfg = {});

}  // namespace exmart
