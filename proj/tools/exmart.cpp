#include <cstddef>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exmart/experiment.hpp"
#include "exmart/ingest.hpp"
#include "exmart/martingale.hpp"
#include "exmart/types.hpp"

namespace {

struct CommonFlags {
  std::string scenario = "A";
  std::vector<double> lambdas;
  double epsilon = 0.92;
  std::uint64_t seed = 0;
  std::size_t segments = 10;
  std::size_t segmentLen = 1000;
  std::size_t dim = 0;
  double noisePct = -1.0;
  std::string strangeness = "knn";
  std::size_t replicas = 20;
  std::string input;
  std::string changes;
  std::string recipe;
  std::string labelCol = "label";
  std::string out;
  bool emitTrajectory = false;
  std::size_t k = 1;
  double gamma = 0.0;
  double c = 10.0;
  std::size_t retrainEvery = 1;
  std::size_t windowCap = 0;
  std::size_t clustersPerClass = 2;
  std::size_t threads = 0;
};

exmart::RunConfig toRunConfig(const CommonFlags& flags, bool dimSet, bool noiseSet,
                              bool capSet) {
  exmart::RunConfig cfg;
  cfg.scenario = exmart::scenarioFromName(flags.scenario);
  if (!flags.lambdas.empty()) cfg.lambdas = flags.lambdas;
  cfg.epsilon = flags.epsilon;
  cfg.seed = flags.seed;
  cfg.numSegments = flags.segments;
  cfg.segmentLen = flags.segmentLen;
  if (dimSet) cfg.dim = flags.dim;
  if (noiseSet) cfg.noisePct = flags.noisePct;
  cfg.provider = exmart::providerFromName(flags.strangeness);
  cfg.replicas = flags.replicas;
  cfg.inputPath = flags.input;
  cfg.changesPath = flags.changes;
  cfg.recipePath = flags.recipe;
  cfg.labelColumn = flags.labelCol;
  cfg.outDir = flags.out;
  cfg.emitTrajectory = flags.emitTrajectory;
  cfg.k = flags.k;
  cfg.gamma = flags.gamma;
  cfg.svmC = flags.c;
  cfg.retrainEvery = flags.retrainEvery;
  if (capSet) cfg.windowCap = flags.windowCap;
  cfg.clustersPerClass = flags.clustersPerClass;
  cfg.threads = flags.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-change detection by testing stream exchangeability"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* run = app.add_subcommand("run", "Run a detection experiment sweep");
  run->add_option("--scenario", flags.scenario, "A|B|C|D|E|csv|recipe")->capture_default_str();
  run->add_option("--lambda", flags.lambdas, "Detection threshold(s); repeatable");
  run->add_option("--epsilon", flags.epsilon, "Martingale exponent in (0,1)")
      ->capture_default_str();
  run->add_option("--seed", flags.seed, "Master seed")->capture_default_str();
  run->add_option("--segments", flags.segments, "Segments per generated stream")
      ->capture_default_str();
  run->add_option("--segment-len", flags.segmentLen, "Points per segment")->capture_default_str();
  auto* runDim = run->add_option("--dim", flags.dim, "Feature dimension (scenario D/E)");
  auto* runNoise = run->add_option("--noise-pct", flags.noisePct, "Label noise percentage");
  run->add_option("--strangeness", flags.strangeness, "knn|svm")->capture_default_str();
  run->add_option("--replicas", flags.replicas, "Independent replicas per lambda")
      ->capture_default_str();
  run->add_option("--input", flags.input, "Labeled CSV stream (scenario csv)");
  run->add_option("--changes", flags.changes, "True change indices, one per line (scenario csv)");
  run->add_option("--recipe", flags.recipe, "Stream composition recipe (scenario recipe)");
  run->add_option("--label-col", flags.labelCol, "Label column name or 0-based index")
      ->capture_default_str();
  run->add_option("--out", flags.out, "Output directory")->required();
  run->add_flag("--emit-trajectory", flags.emitTrajectory, "Write per-point martingale CSVs");
  run->add_option("--k", flags.k, "Neighbor count for knn strangeness")->capture_default_str();
  run->add_option("--gamma", flags.gamma, "Kernel width for svm strangeness (0: 1/dim)")
      ->capture_default_str();
  run->add_option("--c", flags.c, "Soft-margin penalty for svm strangeness")
      ->capture_default_str();
  run->add_option("--retrain-every", flags.retrainEvery, "Classifier retrain cadence")
      ->capture_default_str();
  auto* runCap = run->add_option("--window-cap", flags.windowCap, "Bag size cap (default: unbounded)");
  run->add_option("--clusters-per-class", flags.clustersPerClass, "Clusters per class (scenario E)")
      ->capture_default_str();
  run->add_option("--threads", flags.threads, "Worker threads (0: hardware)")
      ->capture_default_str();

  auto* gen = app.add_subcommand("generate", "Generate a synthetic stream as labeled CSV");
  gen->add_option("--scenario", flags.scenario, "A|B|C|D|E")->capture_default_str();
  gen->add_option("--seed", flags.seed, "Master seed")->capture_default_str();
  gen->add_option("--segments", flags.segments, "Segments in the stream")->capture_default_str();
  gen->add_option("--segment-len", flags.segmentLen, "Points per segment")->capture_default_str();
  auto* genDim = gen->add_option("--dim", flags.dim, "Feature dimension (scenario D/E)");
  auto* genNoise = gen->add_option("--noise-pct", flags.noisePct, "Label noise percentage");
  gen->add_option("--clusters-per-class", flags.clustersPerClass, "Clusters per class (scenario E)")
      ->capture_default_str();
  gen->add_option("--out", flags.out, "Output CSV path")->required();
  gen->add_option("--changes", flags.changes, "Also write true change indices here");

  double alpha = 0.05;
  double beta = 0.0;
  double designLambda = 0.0;
  std::vector<double> postP;
  auto* design = app.add_subcommand("design", "Derive threshold, false-alarm bound, mean delay");
  design->add_option("--alpha", alpha, "Target false-alarm rate")->capture_default_str();
  design->add_option("--beta", beta, "Target miss rate")->capture_default_str();
  design->add_option("--epsilon", flags.epsilon, "Martingale exponent in (0,1)")
      ->capture_default_str();
  auto* designL = design->add_option("--lambda", designLambda, "Threshold (default: derived)");
  design->add_option("--p", postP, "Post-change p-value sample; repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) {
      const auto cfg =
          toRunConfig(flags, runDim->count() > 0, runNoise->count() > 0, runCap->count() > 0);
      const auto result = exmart::runExperiment(cfg);
      std::size_t failures = 0;
      for (const auto& cell : result.cells) {
        if (cell.failed) {
          ++failures;
          std::cerr << "replica failed (lambda=" << cell.lambda << ", replica=" << cell.replica
                    << "): " << cell.error << '\n';
        }
      }
      for (const auto& agg : result.aggregates) {
        std::cout << "lambda=" << agg.lambda << " precision=" << agg.precision
                  << " recall=" << agg.recall << " medianDelay=" << agg.medianDelay
                  << " falseAlarms=" << agg.falseAlarms << '\n';
      }
      std::cout << "wrote " << cfg.outDir << '\n';
      if (failures == result.cells.size()) {
        std::cerr << "all replicas failed\n";
        return 3;
      }
      return 0;
    }

    if (gen->parsed()) {
      auto cfg = toRunConfig(flags, genDim->count() > 0, genNoise->count() > 0, false);
      cfg.outDir.clear();
      const auto stream = exmart::buildScenarioStream(cfg.normalized(), 0);
      exmart::writeLabeledCsv(flags.out, stream.points);
      if (!flags.changes.empty()) {
        exmart::writeChangePoints(flags.changes, stream.trueChangePoints);
      }
      std::cout << "points=" << stream.points.size()
                << " changePoints=" << stream.trueChangePoints.size() << " -> " << flags.out
                << '\n';
      return 0;
    }

    exmart::TestDesign td{alpha, beta};
    const double threshold = exmart::thresholdFromDesign(td);
    const double lambda = designL->count() > 0 ? designLambda : threshold;
    std::cout << "threshold = " << threshold << '\n';
    std::cout << "lambda = " << lambda << '\n';
    std::cout << "doobFalseAlarmBound = " << exmart::doobFalseAlarmBound(lambda) << '\n';
    if (!postP.empty()) {
      std::cout << "meanDelay = "
                << exmart::estimateMeanDelay(lambda, beta, postP, flags.epsilon) << '\n';
    }
    return 0;
  } catch (const exmart::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const exmart::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
