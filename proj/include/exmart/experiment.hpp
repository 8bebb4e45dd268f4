#pragma once

#include <optional>
#include <string>
#include <vector>

#include "exmart/eval.hpp"
#include "exmart/types.hpp"

namespace exmart {

enum class Scenario { A, B, C, D, E, Csv, Recipe };

enum class ProviderKind { Knn, Svm };

std::string scenarioName(Scenario s);
Scenario scenarioFromName(const std::string& name);
std::string providerName(ProviderKind p);
ProviderKind providerFromName(const std::string& name);

struct RunConfig {
  Scenario scenario = Scenario::A;

  double epsilon = 0.92;
  std::vector<double> lambdas = {10.0};
  std::optional<std::size_t> windowCap;

  ProviderKind provider = ProviderKind::Knn;
  std::size_t k = 1;          ///< kNN neighbor count
  double gamma = 0.0;         ///< kernel width; 0 means 1/dimension
  double svmC = 10.0;
  std::size_t retrainEvery = 1;

  std::size_t segmentLen = 1000;
  std::size_t numSegments = 10;
  std::optional<std::size_t> dim;
  std::optional<double> noisePct;
  std::size_t clustersPerClass = 2;

  std::size_t replicas = 20;
  std::uint64_t seed = 0;

  std::string inputPath;
  std::string changesPath;
  std::string recipePath;
  std::string labelColumn = "label";

  std::string outDir;  ///< empty: keep results in memory only
  bool emitTrajectory = false;
  std::size_t threads = 0;  ///< 0: hardware concurrency

  /// Fills scenario-dependent defaults (dimension, noise) and rejects
  /// inconsistent combinations.
  RunConfig normalized() const;
};

struct CellOutcome {
  double lambda = 0.0;
  std::size_t replica = 0;
  bool failed = false;
  std::string error;
  EvalReport report;
  std::uint64_t points = 0;
};

/// Per-lambda medians across successful replicas (NaN entries are skipped
/// per column).
struct LambdaAggregate {
  double lambda = 0.0;
  double points = 0.0;
  double numTrueChanges = 0.0;
  double numDetections = 0.0;
  double correct = 0.0;
  double falseAlarms = 0.0;
  double missed = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double meanDelay = 0.0;
  double medianDelay = 0.0;
  double ksStatistic = 0.0;
  double ksPValue = 0.0;
};

struct ExperimentResult {
  std::vector<CellOutcome> cells;  ///< lambda-major, replica-minor order
  std::vector<LambdaAggregate> aggregates;
};

/// Builds one replica's synthetic stream for scenarios A-E from a
/// normalized config. File-backed scenarios are rejected here.
StreamSpec buildScenarioStream(const RunConfig& cfg, std::size_t replica);

/// Runs the full (lambda x replica) sweep: builds each replica's stream,
/// drives the detector (one-vs-rest bank when the stream has more than two
/// classes), scores detections, and aggregates per-lambda medians. When
/// outDir is set, writes sweep.csv, per-cell reports, optional trajectories,
/// and manifest.json. Replica failures are recorded and the sweep continues.
ExperimentResult runExperiment(const RunConfig& cfg);

}  // namespace exmart
