#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exmart/types.hpp"

namespace exmart {

struct PoolDraw {
  std::string pool;
  std::size_t count = 0;
  std::optional<int> relabelTo;
};

struct SegmentPlan {
  std::vector<PoolDraw> draws;
  bool shuffle = false;
};

struct SegmentRecipe {
  std::map<std::string, std::vector<LabeledPoint>> sources;
  std::vector<SegmentPlan> schedule;
};

/// Reads a labeled CSV: header row required, every column numeric, the label
/// column (by header name, or 0-based index when the name is absent and the
/// argument parses as an integer) holds integer classes. Throws ParseError
/// naming the offending line.
std::vector<LabeledPoint> loadLabeledCsv(const std::string& path,
                                         const std::string& labelColumn = "label");

/// Parses a recipe file and loads every pool it names. Lines are either
/// `pool <name> <csv-path> [<label-column>]` or
/// `segment <shuffle|noshuffle> <pool>:<count>[:<relabel>] ...`;
/// `#` starts a comment and CSV paths resolve relative to the recipe file.
SegmentRecipe loadRecipe(const std::string& path);

/// Emits the schedule's segments in order, drawing each pool's points
/// sequentially without replacement, relabeling before any shuffle. Change
/// points mark the first index of every segment after the first.
StreamSpec composeStream(const SegmentRecipe& recipe, std::uint64_t seed);

/// Writes points as `f1,...,fm,label` with round-trip precision.
void writeLabeledCsv(const std::string& path, const std::vector<LabeledPoint>& points);

/// Writes one 1-based change index per line.
void writeChangePoints(const std::string& path, const std::vector<std::uint64_t>& changes);

}  // namespace exmart
