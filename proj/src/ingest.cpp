#include "exmart/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "exmart/rng.hpp"

namespace exmart {
namespace {

constexpr std::uint64_t kComposeTag = 0x636f6d70ULL;  // "comp"

std::string trimmed(std::string s) {
  const auto notSpace = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notSpace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notSpace).base(), s.end());
  return s;
}

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(trimmed(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(trimmed(cur));
  return fields;
}

double parseNumber(const std::string& field, const std::string& path, std::size_t lineNo) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    throw ParseError(path + ": line " + std::to_string(lineNo) + ": not a number: '" + field + "'");
  }
  return value;
}

int parseLabel(const std::string& field, const std::string& path, std::size_t lineNo) {
  const double value = parseNumber(field, path, lineNo);
  const double rounded = std::nearbyint(value);
  if (value != rounded || rounded < std::numeric_limits<int>::min() ||
      rounded > std::numeric_limits<int>::max()) {
    throw ParseError(path + ": line " + std::to_string(lineNo) + ": label must be an integer: '" +
                     field + "'");
  }
  return static_cast<int>(rounded);
}

}  // namespace

std::vector<LabeledPoint> loadLabeledCsv(const std::string& path, const std::string& labelColumn) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");

  std::string line;
  std::size_t lineNo = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;
    header = splitCsvLine(line);
    break;
  }
  if (header.empty()) throw ParseError(path + ": missing header row");

  std::size_t labelIdx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == labelColumn) {
      labelIdx = i;
      break;
    }
  }
  if (labelIdx == header.size()) {
    std::size_t byIndex = 0;
    auto [ptr, ec] =
        std::from_chars(labelColumn.data(), labelColumn.data() + labelColumn.size(), byIndex);
    if (ec == std::errc{} && ptr == labelColumn.data() + labelColumn.size() &&
        byIndex < header.size()) {
      labelIdx = byIndex;
    } else {
      throw ParseError(path + ": line 1: no column named '" + labelColumn + "'");
    }
  }

  std::vector<LabeledPoint> points;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;
    const auto fields = splitCsvLine(line);
    if (fields.size() != header.size()) {
      throw ParseError(path + ": line " + std::to_string(lineNo) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    LabeledPoint pt;
    pt.features.reserve(header.size() - 1);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == labelIdx) {
        pt.label = parseLabel(fields[i], path, lineNo);
      } else {
        pt.features.push_back(parseNumber(fields[i], path, lineNo));
      }
    }
    points.push_back(std::move(pt));
  }
  return points;
}

SegmentRecipe loadRecipe(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  const auto baseDir = std::filesystem::path(path).parent_path();

  SegmentRecipe recipe;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::vector<std::string> tok;
    std::string t;
    while (tokens >> t) {
      if (t.front() == '#') break;
      tok.push_back(t);
    }
    if (tok.empty()) continue;
    const std::string where = path + ": line " + std::to_string(lineNo);

    if (tok[0] == "pool") {
      if (tok.size() < 3 || tok.size() > 4) {
        throw ParseError(where + ": expected 'pool <name> <csv-path> [<label-column>]'");
      }
      if (recipe.sources.count(tok[1])) {
        throw ParseError(where + ": duplicate pool '" + tok[1] + "'");
      }
      const auto csvPath = baseDir / tok[2];
      recipe.sources[tok[1]] =
          loadLabeledCsv(csvPath.string(), tok.size() == 4 ? tok[3] : "label");
    } else if (tok[0] == "segment") {
      if (tok.size() < 3) {
        throw ParseError(where + ": expected 'segment <shuffle|noshuffle> <pool>:<count>[:<relabel>] ...'");
      }
      SegmentPlan plan;
      if (tok[1] == "shuffle") {
        plan.shuffle = true;
      } else if (tok[1] == "noshuffle") {
        plan.shuffle = false;
      } else {
        throw ParseError(where + ": expected 'shuffle' or 'noshuffle', got '" + tok[1] + "'");
      }
      for (std::size_t i = 2; i < tok.size(); ++i) {
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : tok[i]) {
          if (ch == ':') {
            parts.push_back(cur);
            cur.clear();
          } else {
            cur += ch;
          }
        }
        parts.push_back(cur);
        if (parts.size() < 2 || parts.size() > 3) {
          throw ParseError(where + ": bad draw '" + tok[i] + "' (want <pool>:<count>[:<relabel>])");
        }
        PoolDraw draw;
        draw.pool = parts[0];
        if (!recipe.sources.count(draw.pool)) {
          throw ParseError(where + ": unknown pool '" + draw.pool + "'");
        }
        try {
          draw.count = std::stoull(parts[1]);
        } catch (const std::exception&) {
          throw ParseError(where + ": bad count '" + parts[1] + "'");
        }
        if (draw.count == 0) throw ParseError(where + ": count must be positive");
        if (parts.size() == 3) {
          try {
            draw.relabelTo = std::stoi(parts[2]);
          } catch (const std::exception&) {
            throw ParseError(where + ": bad relabel value '" + parts[2] + "'");
          }
        }
        plan.draws.push_back(std::move(draw));
      }
      recipe.schedule.push_back(std::move(plan));
    } else {
      throw ParseError(where + ": unknown directive '" + tok[0] + "'");
    }
  }
  if (recipe.schedule.empty()) throw ParseError(path + ": recipe defines no segments");
  return recipe;
}

StreamSpec composeStream(const SegmentRecipe& recipe, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, kComposeTag);
  std::map<std::string, std::size_t> cursors;
  StreamSpec stream;

  for (const auto& plan : recipe.schedule) {
    if (!stream.points.empty()) {
      stream.trueChangePoints.push_back(stream.points.size() + 1);
    }
    std::vector<LabeledPoint> segment;
    for (const auto& draw : plan.draws) {
      const auto it = recipe.sources.find(draw.pool);
      if (it == recipe.sources.end()) {
        throw ParseError("composeStream: unknown pool '" + draw.pool + "'");
      }
      const auto& pool = it->second;
      std::size_t& cursor = cursors[draw.pool];
      if (cursor + draw.count > pool.size()) {
        throw ParseError("composeStream: pool '" + draw.pool + "' exhausted; needs " +
                         std::to_string(cursor + draw.count - pool.size()) + " more points");
      }
      for (std::size_t i = 0; i < draw.count; ++i) {
        LabeledPoint pt = pool[cursor + i];
        if (draw.relabelTo) pt.label = *draw.relabelTo;
        segment.push_back(std::move(pt));
      }
      cursor += draw.count;
    }
    if (plan.shuffle) rng.shuffle(segment);
    for (auto& pt : segment) stream.points.push_back(std::move(pt));
  }

  if (!stream.points.empty()) {
    const std::size_t dim = stream.points.front().features.size();
    for (const auto& pt : stream.points) {
      if (pt.features.size() != dim) {
        throw ParseError("composeStream: pools have inconsistent feature dimensions");
      }
    }
  }
  return stream;
}

void writeLabeledCsv(const std::string& path, const std::vector<LabeledPoint>& points) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  const std::size_t dim = points.empty() ? 0 : points.front().features.size();
  for (std::size_t d = 1; d <= dim; ++d) out << 'f' << d << ',';
  out << "label\n";
  char buf[64];
  for (const auto& pt : points) {
    for (double f : pt.features) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), f);
      out.write(buf, ptr - buf);
      out << ',';
    }
    out << pt.label << '\n';
  }
}

void writeChangePoints(const std::string& path, const std::vector<std::uint64_t>& changes) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  for (auto c : changes) out << c << '\n';
}

}  // namespace exmart
