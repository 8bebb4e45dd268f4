#include "exmart/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "exmart/detector.hpp"
#include "exmart/ingest.hpp"
#include "exmart/rng.hpp"
#include "exmart/simulate.hpp"

namespace exmart {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr std::uint64_t kStreamTag = 0x73747265ULL;    // "stre"
constexpr std::uint64_t kDetectorTag = 0x64657463ULL;  // "detc"

std::string formatDouble(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::uint64_t> readChangePoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::vector<std::uint64_t> changes;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw ParseError(path + ": line " + std::to_string(lineNo) + ": not an index: '" + line +
                       "'");
    }
    changes.push_back(value);
  }
  if (!std::is_sorted(changes.begin(), changes.end())) {
    throw ParseError(path + ": change points must be sorted ascending");
  }
  return changes;
}

std::vector<int> distinctLabels(const StreamSpec& stream) {
  std::vector<int> labels;
  for (const auto& pt : stream.points) labels.push_back(pt.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

double medianSkipNan(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

struct CellWork {
  const RunConfig* cfg = nullptr;
  const StreamSpec* stream = nullptr;
  double lambda = 0.0;
  std::size_t replica = 0;
};

std::unique_ptr<StrangenessProvider> makeProvider(const RunConfig& cfg) {
  if (cfg.provider == ProviderKind::Svm) {
    SvmTrainConfig svmCfg;
    svmCfg.gamma = cfg.gamma;
    svmCfg.c = cfg.svmC;
    return std::make_unique<SvmProvider>(svmCfg, cfg.retrainEvery);
  }
  return std::make_unique<KnnProvider>(cfg.k);
}

struct TrajectoryRow {
  std::uint64_t index = 0;
  std::vector<double> logM;
  std::vector<double> p;
  bool detection = false;
};

struct CellData {
  CellOutcome outcome;
  std::vector<int> channelLabels;  ///< empty for a single-channel run
  std::vector<TrajectoryRow> trajectory;
};

CellData runCell(const CellWork& work) {
  const RunConfig& cfg = *work.cfg;
  const StreamSpec& stream = *work.stream;

  CellData data;
  data.outcome.lambda = work.lambda;
  data.outcome.replica = work.replica;
  data.outcome.points = stream.points.size();

  DetectorConfig dcfg;
  dcfg.epsilon = cfg.epsilon;
  dcfg.lambda = work.lambda;
  dcfg.windowCap = cfg.windowCap;
  dcfg.seed = Rng::deriveSeed(cfg.seed, kDetectorTag, work.replica);

  const auto labels = distinctLabels(stream);
  const bool multiChannel = labels.size() > 2;

  std::vector<std::uint64_t> detections;
  std::vector<double> pValues;
  if (cfg.emitTrajectory) data.trajectory.reserve(stream.points.size());

  if (multiChannel) {
    data.channelLabels = labels;
    MultiChannelDetector bank(labels, dcfg, [&cfg] { return makeProvider(cfg); });
    for (const auto& pt : stream.points) {
      const auto event = bank.step(pt);
      if (event) detections.push_back(event->index);
      for (std::size_t ch = 0; ch < bank.channelCount(); ++ch) {
        pValues.push_back(bank.channel(ch).lastPValue());
      }
      if (cfg.emitTrajectory) {
        TrajectoryRow row;
        row.index = bank.channel(0).pointsSeen();
        for (std::size_t ch = 0; ch < bank.channelCount(); ++ch) {
          row.logM.push_back(bank.channel(ch).lastTestedLogMartingale());
          row.p.push_back(bank.channel(ch).lastPValue());
        }
        row.detection = event.has_value();
        data.trajectory.push_back(std::move(row));
      }
    }
  } else {
    // Two-class streams run on one channel with labels mapped to -1/+1.
    const int hi = labels.empty() ? 1 : labels.back();
    Detector detector(dcfg, makeProvider(cfg));
    for (const auto& pt : stream.points) {
      LabeledPoint mapped = pt;
      mapped.label = pt.label == hi ? 1 : -1;
      const auto event = detector.step(mapped);
      if (event) detections.push_back(event->index);
      pValues.push_back(detector.lastPValue());
      if (cfg.emitTrajectory) {
        TrajectoryRow row;
        row.index = detector.pointsSeen();
        row.logM.push_back(detector.lastTestedLogMartingale());
        row.p.push_back(detector.lastPValue());
        row.detection = event.has_value();
        data.trajectory.push_back(std::move(row));
      }
    }
  }

  const auto match = matchDetections(detections, stream.trueChangePoints, stream.points.size());
  std::optional<KsResult> ks;
  if (pValues.size() >= 5) ks = ksUniformTest(std::move(pValues));
  data.outcome.report = buildReport(match, stream.trueChangePoints.size(), ks);
  return data;
}

std::string cellFileSuffix(double lambda, std::size_t replica) {
  return "lambda" + formatDouble(lambda) + "_replica" + std::to_string(replica);
}

void writeTrajectory(const std::string& path, const CellData& data) {
  std::ofstream out(path);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out << "index";
  if (data.channelLabels.empty()) {
    out << ",logM,p";
  } else {
    for (int label : data.channelLabels) out << ",logM_c" << label;
    for (int label : data.channelLabels) out << ",p_c" << label;
  }
  out << ",detectionFlag\n";
  for (const auto& row : data.trajectory) {
    out << row.index;
    if (data.channelLabels.empty()) {
      out << ',' << formatDouble(row.logM[0]) << ',' << formatDouble(row.p[0]);
    } else {
      for (double v : row.logM) out << ',' << formatDouble(v);
      for (double v : row.p) out << ',' << formatDouble(v);
    }
    out << ',' << (row.detection ? 1 : 0) << '\n';
  }
}

std::string sweepRow(const RunConfig& cfg, const CellOutcome& cell) {
  const EvalReport& r = cell.report;
  std::string row = scenarioName(cfg.scenario) + "," + formatDouble(cell.lambda) + "," +
                    formatDouble(cfg.epsilon) + "," + providerName(cfg.provider) + "," +
                    std::to_string(cfg.seed) + "," + std::to_string(cell.replica) + "," +
                    std::to_string(cell.points) + "," + std::to_string(r.numTrueChanges) + "," +
                    std::to_string(r.numDetections) + "," + std::to_string(r.correct) + "," +
                    std::to_string(r.falseAlarms) + "," + std::to_string(r.missed) + "," +
                    formatDouble(r.precision) + "," + formatDouble(r.recall) + "," +
                    formatDouble(r.delayStats.mean) + "," + formatDouble(r.delayStats.median) +
                    "," + (r.hasKs ? formatDouble(r.ksStatistic) : "nan") + "," +
                    (r.hasKs ? formatDouble(r.ksPValue) : "nan");
  return row;
}

std::string aggregateRow(const RunConfig& cfg, const LambdaAggregate& agg) {
  std::string row = scenarioName(cfg.scenario) + "," + formatDouble(agg.lambda) + "," +
                    formatDouble(cfg.epsilon) + "," + providerName(cfg.provider) + "," +
                    std::to_string(cfg.seed) + ",-1," + formatDouble(agg.points) + "," +
                    formatDouble(agg.numTrueChanges) + "," + formatDouble(agg.numDetections) +
                    "," + formatDouble(agg.correct) + "," + formatDouble(agg.falseAlarms) + "," +
                    formatDouble(agg.missed) + "," + formatDouble(agg.precision) + "," +
                    formatDouble(agg.recall) + "," + formatDouble(agg.meanDelay) + "," +
                    formatDouble(agg.medianDelay) + "," + formatDouble(agg.ksStatistic) + "," +
                    formatDouble(agg.ksPValue);
  return row;
}

}  // namespace

std::string scenarioName(Scenario s) {
  switch (s) {
    case Scenario::A: return "A";
    case Scenario::B: return "B";
    case Scenario::C: return "C";
    case Scenario::D: return "D";
    case Scenario::E: return "E";
    case Scenario::Csv: return "csv";
    case Scenario::Recipe: return "recipe";
  }
  return "?";
}

Scenario scenarioFromName(const std::string& name) {
  if (name == "A") return Scenario::A;
  if (name == "B") return Scenario::B;
  if (name == "C") return Scenario::C;
  if (name == "D") return Scenario::D;
  if (name == "E") return Scenario::E;
  if (name == "csv") return Scenario::Csv;
  if (name == "recipe") return Scenario::Recipe;
  throw ConfigError("unknown scenario '" + name + "' (want A|B|C|D|E|csv|recipe)");
}

std::string providerName(ProviderKind p) {
  return p == ProviderKind::Svm ? "svm" : "knn";
}

ProviderKind providerFromName(const std::string& name) {
  if (name == "knn") return ProviderKind::Knn;
  if (name == "svm") return ProviderKind::Svm;
  throw ConfigError("unknown strangeness provider '" + name + "' (want knn|svm)");
}

RunConfig RunConfig::normalized() const {
  RunConfig cfg = *this;
  if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 1.0)) {
    throw ConfigError("epsilon must lie strictly in (0, 1)");
  }
  if (cfg.lambdas.empty()) throw ConfigError("at least one lambda is required");
  for (double lambda : cfg.lambdas) {
    if (!(lambda > 1.0)) throw ConfigError("lambda must exceed 1");
  }
  if (cfg.replicas == 0) throw ConfigError("replicas must be positive");
  if (cfg.k == 0) throw ConfigError("k must be positive");
  if (cfg.retrainEvery == 0) throw ConfigError("retrain cadence must be positive");

  switch (cfg.scenario) {
    case Scenario::A:
    case Scenario::B:
    case Scenario::C:
      if (cfg.dim && *cfg.dim != 2) {
        throw ConfigError("scenario " + scenarioName(cfg.scenario) + " is two-dimensional");
      }
      cfg.dim = 2;
      if (!cfg.noisePct) cfg.noisePct = cfg.scenario == Scenario::C ? 5.0 : 0.0;
      break;
    case Scenario::D:
    case Scenario::E:
      if (!cfg.dim) cfg.dim = 10;
      if (!cfg.noisePct) cfg.noisePct = 5.0;
      break;
    case Scenario::Csv:
      if (cfg.inputPath.empty()) throw ConfigError("csv scenario requires an input path");
      break;
    case Scenario::Recipe:
      if (cfg.recipePath.empty()) throw ConfigError("recipe scenario requires a recipe path");
      break;
  }
  if (cfg.noisePct && (*cfg.noisePct < 0.0 || *cfg.noisePct >= 50.0)) {
    throw ConfigError("noise percentage must lie in [0, 50)");
  }
  return cfg;
}

StreamSpec buildScenarioStream(const RunConfig& cfg, std::size_t replica) {
  const std::uint64_t streamSeed = Rng::deriveSeed(cfg.seed, kStreamTag, replica);
  switch (cfg.scenario) {
    case Scenario::A:
    case Scenario::B:
    case Scenario::C:
    case Scenario::D: {
      HyperplaneConfig hp;
      hp.m = *cfg.dim;
      hp.segmentLen = cfg.segmentLen;
      hp.numSegments = cfg.numSegments;
      hp.rotationMode = cfg.scenario == Scenario::A   ? RotationMode::Restricted
                        : cfg.scenario == Scenario::D ? RotationMode::RandomWeights
                                                      : RotationMode::Arbitrary;
      hp.noisePct = *cfg.noisePct;
      return generateHyperplaneStream(hp, streamSeed);
    }
    case Scenario::E: {
      NdcConfig nc;
      nc.m = *cfg.dim;
      nc.clustersPerClass = cfg.clustersPerClass;
      nc.segmentLen = cfg.segmentLen;
      nc.numSegments = cfg.numSegments;
      nc.noisePct = *cfg.noisePct;
      return generateNdcStream(nc, streamSeed);
    }
    case Scenario::Csv:
    case Scenario::Recipe:
      break;
  }
  throw ConfigError("buildScenarioStream: only synthetic scenarios A-E can be generated");
}

ExperimentResult runExperiment(const RunConfig& rawCfg) {
  const RunConfig cfg = rawCfg.normalized();

  // Streams are built up front, serially, so worker scheduling can never
  // change what any cell sees. A fixed CSV input is shared by all replicas;
  // everything else varies per replica through the derived stream seed.
  std::vector<StreamSpec> streams;
  std::optional<SegmentRecipe> recipe;
  if (cfg.scenario == Scenario::Recipe) recipe = loadRecipe(cfg.recipePath);

  const std::size_t streamCount = cfg.scenario == Scenario::Csv ? 1 : cfg.replicas;
  streams.reserve(streamCount);
  for (std::size_t replica = 0; replica < streamCount; ++replica) {
    switch (cfg.scenario) {
      case Scenario::Csv: {
        StreamSpec stream;
        stream.points = loadLabeledCsv(cfg.inputPath, cfg.labelColumn);
        if (!cfg.changesPath.empty()) {
          stream.trueChangePoints = readChangePoints(cfg.changesPath);
        }
        streams.push_back(std::move(stream));
        break;
      }
      case Scenario::Recipe:
        streams.push_back(composeStream(*recipe, Rng::deriveSeed(cfg.seed, kStreamTag, replica)));
        break;
      default:
        streams.push_back(buildScenarioStream(cfg, replica));
        break;
    }
  }

  std::vector<CellWork> work;
  work.reserve(cfg.lambdas.size() * cfg.replicas);
  for (double lambda : cfg.lambdas) {
    for (std::size_t replica = 0; replica < cfg.replicas; ++replica) {
      work.push_back({&cfg, &streams[replica % streams.size()], lambda, replica});
    }
  }

  std::vector<CellData> cells(work.size());
  std::atomic<std::size_t> next{0};
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t nThreads = std::min(work.size(), cfg.threads > 0 ? cfg.threads : hw);

  const auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= work.size()) return;
      try {
        cells[idx] = runCell(work[idx]);
      } catch (const std::exception& ex) {
        cells[idx].outcome.lambda = work[idx].lambda;
        cells[idx].outcome.replica = work[idx].replica;
        cells[idx].outcome.failed = true;
        cells[idx].outcome.error = ex.what();
      }
    }
  };
  if (nThreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nThreads);
    for (std::size_t i = 0; i < nThreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.cells.reserve(cells.size());
  for (const auto& cell : cells) result.cells.push_back(cell.outcome);

  for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
    LambdaAggregate agg;
    agg.lambda = cfg.lambdas[li];
    std::vector<double> points, changes, dets, correct, fas, missed, prec, rec, meanD, medD, ksD,
        ksP;
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
      const CellOutcome& cell = result.cells[li * cfg.replicas + r];
      if (cell.failed) continue;
      points.push_back(static_cast<double>(cell.points));
      changes.push_back(static_cast<double>(cell.report.numTrueChanges));
      dets.push_back(static_cast<double>(cell.report.numDetections));
      correct.push_back(static_cast<double>(cell.report.correct));
      fas.push_back(static_cast<double>(cell.report.falseAlarms));
      missed.push_back(static_cast<double>(cell.report.missed));
      prec.push_back(cell.report.precision);
      rec.push_back(cell.report.recall);
      meanD.push_back(cell.report.delayStats.mean);
      medD.push_back(cell.report.delayStats.median);
      ksD.push_back(cell.report.hasKs ? cell.report.ksStatistic
                                      : std::numeric_limits<double>::quiet_NaN());
      ksP.push_back(cell.report.hasKs ? cell.report.ksPValue
                                      : std::numeric_limits<double>::quiet_NaN());
    }
    agg.points = medianSkipNan(points);
    agg.numTrueChanges = medianSkipNan(changes);
    agg.numDetections = medianSkipNan(dets);
    agg.correct = medianSkipNan(correct);
    agg.falseAlarms = medianSkipNan(fas);
    agg.missed = medianSkipNan(missed);
    agg.precision = medianSkipNan(prec);
    agg.recall = medianSkipNan(rec);
    agg.meanDelay = medianSkipNan(meanD);
    agg.medianDelay = medianSkipNan(medD);
    agg.ksStatistic = medianSkipNan(ksD);
    agg.ksPValue = medianSkipNan(ksP);
    result.aggregates.push_back(agg);
  }

  if (cfg.outDir.empty()) return result;

  const fs::path outDir(cfg.outDir);
  fs::create_directories(outDir / "reports");
  if (cfg.emitTrajectory) fs::create_directories(outDir / "trajectories");

  Json manifest;
  manifest["config"] = {{"scenario", scenarioName(cfg.scenario)},
                        {"epsilon", cfg.epsilon},
                        {"lambdas", cfg.lambdas},
                        {"windowCap", cfg.windowCap ? Json(*cfg.windowCap) : Json(nullptr)},
                        {"provider", providerName(cfg.provider)},
                        {"k", cfg.k},
                        {"gamma", cfg.gamma},
                        {"svmC", cfg.svmC},
                        {"retrainEvery", cfg.retrainEvery},
                        {"segmentLen", cfg.segmentLen},
                        {"numSegments", cfg.numSegments},
                        {"dim", cfg.dim ? Json(*cfg.dim) : Json(nullptr)},
                        {"noisePct", cfg.noisePct ? Json(*cfg.noisePct) : Json(nullptr)},
                        {"clustersPerClass", cfg.clustersPerClass},
                        {"replicas", cfg.replicas},
                        {"seed", cfg.seed},
                        {"inputPath", cfg.inputPath},
                        {"changesPath", cfg.changesPath},
                        {"recipePath", cfg.recipePath},
                        {"labelColumn", cfg.labelColumn},
                        {"emitTrajectory", cfg.emitTrajectory}};

  std::ofstream sweep(outDir / "sweep.csv");
  if (!sweep) throw ParseError((outDir / "sweep.csv").string() + ": cannot open file for writing");
  sweep << "scenario,lambda,epsilon,provider,seed,replica,points,numTrueChanges,numDetections,"
           "correct,falseAlarms,missed,precision,recall,meanDelay,medianDelay,ksStatistic,"
           "ksPValue\n";

  Json reports = Json::array();
  Json trajectories = Json::array();
  Json errors = Json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const CellOutcome& cell = cells[i].outcome;
    if (cell.failed) {
      errors.push_back(
          {{"lambda", cell.lambda}, {"replica", cell.replica}, {"message", cell.error}});
      continue;
    }
    sweep << sweepRow(cfg, cell) << '\n';

    const std::string suffix = cellFileSuffix(cell.lambda, cell.replica);
    const fs::path reportPath = outDir / "reports" / ("report_" + suffix + ".txt");
    std::ofstream report(reportPath);
    if (!report) throw ParseError(reportPath.string() + ": cannot open file for writing");
    report << "scenario = " << scenarioName(cfg.scenario) << '\n'
           << "lambda = " << formatDouble(cell.lambda) << '\n'
           << "epsilon = " << formatDouble(cfg.epsilon) << '\n'
           << "provider = " << providerName(cfg.provider) << '\n'
           << "seed = " << cfg.seed << '\n'
           << "replica = " << cell.replica << '\n'
           << "points = " << cell.points << '\n'
           << cell.report.toKeyValue();
    reports.push_back(fs::relative(reportPath, outDir).string());

    if (cfg.emitTrajectory) {
      const fs::path trajPath = outDir / "trajectories" / ("traj_" + suffix + ".csv");
      writeTrajectory(trajPath.string(), cells[i]);
      trajectories.push_back(fs::relative(trajPath, outDir).string());
    }
  }
  for (const auto& agg : result.aggregates) {
    sweep << aggregateRow(cfg, agg) << '\n';
  }
  sweep.close();

  Json aggs = Json::array();
  for (const auto& agg : result.aggregates) {
    aggs.push_back({{"lambda", agg.lambda},
                    {"precision", agg.precision},
                    {"recall", agg.recall},
                    {"meanDelay", agg.meanDelay},
                    {"medianDelay", agg.medianDelay},
                    {"falseAlarms", agg.falseAlarms},
                    {"missed", agg.missed},
                    {"ksStatistic", agg.ksStatistic},
                    {"ksPValue", agg.ksPValue}});
  }
  manifest["artifacts"] = {{"sweep", "sweep.csv"}, {"reports", reports}};
  if (cfg.emitTrajectory) manifest["artifacts"]["trajectories"] = trajectories;
  manifest["errors"] = errors;
  manifest["aggregates"] = aggs;

  std::ofstream manifestOut(outDir / "manifest.json");
  if (!manifestOut) {
    throw ParseError((outDir / "manifest.json").string() + ": cannot open file for writing");
  }
  manifestOut << manifest.dump(2) << '\n';

  return result;
}

}  // namespace exmart
