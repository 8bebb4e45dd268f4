// Acceptance checks for the change-detection library. Each criterion prints
// one PASS/FAIL line; run with --criterion N for a single one.
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "exmart/detector.hpp"
#include "exmart/eval.hpp"
#include "exmart/experiment.hpp"
#include "exmart/ingest.hpp"
#include "exmart/martingale.hpp"
#include "exmart/pvalue.hpp"
#include "exmart/rng.hpp"
#include "exmart/simulate.hpp"
#include "exmart/strangeness.hpp"

using namespace exmart;
namespace fs = std::filesystem;

namespace {

constexpr double kEpsilon = 0.92;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!fails_.empty()) fails_ += "; ";
      fails_ += what;
    }
  }
  Outcome done(const std::string& summary) const {
    return {pass_, pass_ ? summary : fails_};
  }

 private:
  bool pass_ = true;
  std::string fails_;
};

bool relClose(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::abs(want);
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

/// p-values of a stream fed through the kNN pipeline with no detection
/// resets, plus the running supremum of the log martingale.
struct PipelineTrace {
  std::vector<double> pValues;
  double supLogM = -std::numeric_limits<double>::infinity();
};

PipelineTrace tracePValues(const std::vector<LabeledPoint>& points, std::uint64_t thetaSeed) {
  PipelineTrace trace;
  trace.pValues.reserve(points.size());
  KnnProvider provider(1);
  Rng theta = Rng::derive(thetaSeed, 0x74686574ULL);
  std::vector<LabeledPoint> bag;
  bag.reserve(points.size());
  double logM = 0.0;
  for (const auto& pt : points) {
    bag.push_back(pt);
    const auto scores = provider.score(bag);
    const double th = std::clamp(theta.uniform(), kThetaMin, kThetaMax);
    const double p = computePValue(*scores, th);
    trace.pValues.push_back(p);
    logM += logUpdateFactor(p, kEpsilon);
    trace.supLogM = std::max(trace.supLogM, logM);
  }
  return trace;
}

std::vector<LabeledPoint> iidPoints(std::uint64_t seed, std::size_t n) {
  HyperplaneConfig cfg;
  cfg.segmentLen = n;
  cfg.numSegments = 1;
  cfg.rotationMode = RotationMode::Arbitrary;
  return generateHyperplaneStream(cfg, seed).points;
}

RunConfig deskConfig(Scenario scenario, std::vector<double> lambdas) {
  RunConfig cfg;
  cfg.scenario = scenario;
  cfg.segmentLen = 1000;
  cfg.numSegments = 10;
  cfg.replicas = 20;
  cfg.lambdas = std::move(lambdas);
  cfg.seed = 20260819;
  cfg.provider = ProviderKind::Knn;
  cfg.k = 1;
  return cfg;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("exmart_acc_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

Outcome criterion1() {
  Checker check;
  const double thetaHi = 1.0 - 1e-9;

  const std::vector<double> allTied = {5, 5, 5, 5};
  check.expect(relClose(computePValue(allTied, thetaHi), 1.0, 1e-6),
               "all-tied bag near theta=1 should give p near 1");
  const std::vector<double> strictMax = {1, 2, 3, 9};
  check.expect(relClose(computePValue(strictMax, thetaHi), 0.25, 1e-6),
               "strictly largest newcomer should give p near 1/4");
  const std::vector<double> midTies = {1, 3, 2, 2};
  check.expect(computePValue(midTies, 0.5) == 0.5,
               "one greater plus two ties at theta=0.5 should give p=0.5");

  check.expect(std::abs(updateFactor(0.35265, kEpsilon) - 1.0) <= 1e-3,
               "update factor at the unit-ratio crossover should be 1 within 1e-3");
  check.expect(relClose(updateFactor(1.0, kEpsilon), kEpsilon, 1e-6),
               "update factor at p=1 should equal epsilon");
  check.expect(relClose(updateFactor(0.1, kEpsilon), 1.10608327984802, 1e-6),
               "update factor at p=0.1 off reference");

  check.expect(relClose(thresholdFromDesign({0.05, 0.1}), 18.0, 1e-6),
               "threshold for alpha=0.05, beta=0.1 should be 18");
  check.expect(relClose(thresholdFromDesign({0.05, 0.0}), 20.0, 1e-6),
               "threshold for alpha=0.05, beta=0 should be 20");
  check.expect(relClose(thresholdFromDesign({1.0 - 1e-9, 0.0}), 1.0, 1e-6),
               "threshold for a size-one test should be 1");

  check.expect(relClose(doobFalseAlarmBound(20.0), 0.05, 1e-6), "bound at lambda=20 should be 0.05");
  check.expect(doobFalseAlarmBound(1.0) == 1.0, "bound at lambda=1 should be 1");
  check.expect(relClose(doobFalseAlarmBound(4.0), 0.25, 1e-6), "bound at lambda=4 should be 0.25");

  bool threw = false;
  try {
    const std::vector<PValue> flat(10, 0.35265);
    estimateMeanDelay(10.0, 0.0, flat, kEpsilon);
  } catch (const std::domain_error&) {
    threw = true;
  }
  check.expect(threw, "crossover-flat samples should raise the undefined-delay error");

  const std::vector<PValue> low(10, 0.1);
  check.expect(estimateMeanDelay(1.0, 0.0, low, kEpsilon) == 0.0,
               "delay at lambda=1 should be 0");
  check.expect(relClose(estimateMeanDelay(10.0, 0.0, low, kEpsilon), 22.837397071757316, 1e-6),
               "delay for flat p=0.1 at lambda=10 off reference");

  return check.done("15 fixed-value checks to pinned tolerances");
}

Outcome criterion2() {
  Rng rng(20260819);
  const std::size_t n = 1000000;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += updateFactor(rng.uniform(), kEpsilon);
  }
  const double mean = sum / static_cast<double>(n);
  Checker check;
  check.expect(std::abs(mean - 1.0) <= 0.01, "mean " + fmt(mean) + " outside 1 +- 0.01");
  return check.done("mean over 1e6 uniform draws = " + fmt(mean));
}

Outcome criterion3() {
  const std::size_t runs = 400;
  const std::size_t n = 2000;
  const double lambdas[3] = {4.0, 10.0, 20.0};
  std::size_t crossed[3] = {0, 0, 0};

  // One reset-free pass per run serves every threshold: the martingale path
  // is unchanged until its first crossing, so "any detection at lambda"
  // is exactly "running supremum reached lambda".
  for (std::size_t run = 0; run < runs; ++run) {
    const auto trace = tracePValues(iidPoints(3000 + run, n), 3000 + run);
    for (int j = 0; j < 3; ++j) {
      if (trace.supLogM >= std::log(lambdas[j])) ++crossed[j];
    }
  }

  Checker check;
  std::string fracs, bounds;
  for (int j = 0; j < 3; ++j) {
    const double rate = 1.0 / lambdas[j];
    const double bound =
        rate + 2.0 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(runs));
    const double frac = static_cast<double>(crossed[j]) / static_cast<double>(runs);
    check.expect(frac <= bound, "fraction " + fmt(frac) + " above bound " + fmt(bound) +
                                    " at lambda=" + fmt(lambdas[j]));
    fracs += (j ? "/" : "") + fmt(frac);
    bounds += (j ? "/" : "") + fmt(bound);
  }
  return check.done("detection fractions " + fracs + " within bounds " + bounds +
                    " at lambda=4/10/20 over 400 runs");
}

Outcome criterion4() {
  Checker check;

  const std::size_t runsA = 100;
  std::size_t rejections = 0;
  for (std::size_t run = 0; run < runsA; ++run) {
    const auto trace = tracePValues(iidPoints(5000 + run, 500), 5000 + run);
    if (ksUniformTest(trace.pValues).pValue < 0.05) ++rejections;
  }
  const double rejectRate = static_cast<double>(rejections) / static_cast<double>(runsA);
  check.expect(rejectRate <= 0.10, "stable-stream rejection rate " + fmt(rejectRate) +
                                       " above 0.10 over 100 runs");

  const std::size_t runsB = 100;
  const std::size_t seg = 300;
  std::size_t caught = 0;
  for (std::size_t run = 0; run < runsB; ++run) {
    HyperplaneConfig cfg;
    cfg.segmentLen = seg;
    cfg.numSegments = 2;
    cfg.rotationMode = RotationMode::Arbitrary;
    const auto stream = generateHyperplaneStream(cfg, 7000 + run);
    const auto trace = tracePValues(stream.points, 7000 + run);
    for (std::size_t t = seg + 5; t <= seg + 200; ++t) {
      const std::vector<double> window(trace.pValues.begin() + seg, trace.pValues.begin() + t);
      if (ksUniformTest(window).pValue < 0.05) {
        ++caught;
        break;
      }
    }
  }
  const double caughtRate = static_cast<double>(caught) / static_cast<double>(runsB);
  check.expect(caughtRate >= 0.80, "post-change rejection rate " + fmt(caughtRate) +
                                       " below 0.80 over 100 runs");

  return check.done("stable rejection rate " + fmt(rejectRate) +
                    " <= 0.10; post-change rejection within 200 points " + fmt(caughtRate) +
                    " >= 0.80");
}

Outcome criterion5() {
  const auto result = runExperiment(deskConfig(Scenario::B, {100.0, 20.0, 10.0, 4.0}));
  Checker check;
  std::string chain;
  for (std::size_t i = 0; i < result.aggregates.size(); ++i) {
    const auto& agg = result.aggregates[i];
    chain += (i ? " >= " : "") + fmt(agg.precision);
    if (i > 0) {
      check.expect(result.aggregates[i - 1].precision >= agg.precision,
                   "precision rose from lambda=" + fmt(result.aggregates[i - 1].lambda) +
                       " to lambda=" + fmt(agg.lambda));
    }
  }
  check.expect(result.aggregates.front().precision >= 0.9,
               "precision " + fmt(result.aggregates.front().precision) + " below 0.9 at lambda=100");
  check.expect(result.aggregates.back().precision >= 0.6,
               "precision " + fmt(result.aggregates.back().precision) + " below 0.6 at lambda=4");
  return check.done("median precision " + chain + " across lambda = 100/20/10/4");
}

Outcome criterion6() {
  const auto recallAt10 = [](Scenario s) {
    return runExperiment(deskConfig(s, {10.0})).aggregates.front().recall;
  };
  const double a = recallAt10(Scenario::A);
  const double b = recallAt10(Scenario::B);
  const double c = recallAt10(Scenario::C);
  const double d = recallAt10(Scenario::D);
  Checker check;
  check.expect(b >= a, "recall B " + fmt(b) + " below recall A " + fmt(a));
  check.expect(d >= c, "recall D " + fmt(d) + " below recall C " + fmt(c));
  return check.done("median recall at lambda=10: B " + fmt(b) + " >= A " + fmt(a) + ", D " +
                    fmt(d) + " >= C " + fmt(c));
}

Outcome criterion7() {
  const auto result = runExperiment(deskConfig(Scenario::B, {100.0, 4.0}));
  const double slow = result.aggregates[0].medianDelay;
  const double fast = result.aggregates[1].medianDelay;
  Checker check;
  check.expect(!std::isnan(slow) && !std::isnan(fast), "median delay undefined");
  check.expect(slow >= fast, "median delay " + fmt(slow) + " at lambda=100 below " + fmt(fast) +
                                 " at lambda=4");
  return check.done("median delay " + fmt(slow) + " at lambda=100 >= " + fmt(fast) +
                    " at lambda=4");
}

Outcome criterion8() {
  TempDir dir;
  Rng rng(81);
  const auto makePool = [&](const std::string& name, int label, std::size_t count) {
    std::vector<LabeledPoint> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      pts.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1)}, label});
    }
    writeLabeledCsv((dir.path / name).string(), pts);
  };

  Checker check;

  makePool("d01.csv", 0, 1830);
  makePool("d23.csv", 1, 1907);
  makePool("d45.csv", 2, 1723);
  makePool("d67.csv", 3, 1831);
  std::ofstream(dir.path / "digits.recipe")
      << "pool d01 d01.csv\npool d23 d23.csv\npool d45 d45.csv\npool d67 d67.csv\n"
      << "segment shuffle d01:1830\nsegment shuffle d23:1907\n"
      << "segment shuffle d45:1723\nsegment shuffle d67:1831\n";
  const auto digits = composeStream(loadRecipe((dir.path / "digits.recipe").string()), 5);
  check.expect(digits.trueChangePoints == std::vector<std::uint64_t>{1831, 3738, 5461},
               "digit-style change points off");
  check.expect(digits.points.size() == 7291, "digit-style stream length off");

  makePool("n0.csv", 0, 4200);
  makePool("n1.csv", 1, 4200);
  makePool("n2.csv", 2, 4200);
  {
    std::ofstream recipe(dir.path / "cycle.recipe");
    recipe << "pool n0 n0.csv\npool n1 n1.csv\npool n2 n2.csv\n";
    for (int rep = 0; rep < 4; ++rep) {
      recipe << "segment shuffle n0:1000\nsegment shuffle n1:1000\nsegment shuffle n2:1000\n";
    }
  }
  const auto cycle = composeStream(loadRecipe((dir.path / "cycle.recipe").string()), 6);
  check.expect(cycle.points.size() == 12000, "cycled stream length off");
  bool evenly = cycle.trueChangePoints.size() == 11;
  for (std::size_t i = 0; evenly && i < 11; ++i) {
    evenly = cycle.trueChangePoints[i] == 1000 * (i + 1) + 1;
  }
  check.expect(evenly, "cycled stream change points off");

  const auto match = matchDetections({1020, 2054, 2125}, {1001, 2001}, 3000);
  check.expect(match.correctDetections == std::vector<std::uint64_t>{1020, 2054},
               "matched detections off");
  check.expect(match.delays == std::vector<std::uint64_t>{19, 53}, "delays off");
  check.expect(match.falseAlarms == std::vector<std::uint64_t>{2125}, "false alarms off");

  return check.done(
      "change points [1831, 3738, 5461]; 12000 points / 11 changes; "
      "matching {1020, 2054} correct with {2125} false");
}

Outcome criterion9() {
  Checker check;

  {  // determinism: same seed and stream, bit-identical outputs
    HyperplaneConfig hp;
    hp.segmentLen = 200;
    hp.numSegments = 3;
    const auto stream = generateHyperplaneStream(hp, 11);
    std::vector<double> ps[2], logs[2];
    std::vector<std::uint64_t> det[2];
    for (int pass = 0; pass < 2; ++pass) {
      DetectorConfig cfg;
      cfg.lambda = 10.0;
      cfg.seed = 99;
      Detector detector(cfg, std::make_unique<KnnProvider>(1));
      for (const auto& pt : stream.points) {
        const auto event = detector.step(pt);
        ps[pass].push_back(detector.lastPValue());
        logs[pass].push_back(detector.lastTestedLogMartingale());
        if (event) det[pass].push_back(event->index);
      }
    }
    check.expect(ps[0] == ps[1] && logs[0] == logs[1] && det[0] == det[1],
                 "same seed and stream must reproduce identical trajectories");
  }

  {  // reset correctness and history independence across a detection
    DetectorConfig cfg;
    cfg.lambda = 3.0;
    cfg.seed = 9;
    Detector primary(cfg, std::make_unique<KnnProvider>(1));
    std::size_t consumed = 0;
    for (int i = 0; i < 100; ++i) {
      primary.step({{0.05 * i, 0.0}, 1});
      primary.step({{0.05 * i, 5.0}, -1});
      consumed += 2;
    }
    bool detected = false;
    for (int j = 0; j < 100 && !detected; ++j) {
      const auto event = primary.step({{0.05 * j, 5.0}, 1});
      ++consumed;
      if (event) {
        detected = true;
        check.expect(primary.bag().empty() && primary.logMartingale() == 0.0,
                     "detection must clear the bag and reset the martingale");
      }
    }
    check.expect(detected, "burst onto the opposite band must trigger a detection");

    Detector twin(cfg, std::make_unique<KnnProvider>(1));
    const auto unrelated = iidPoints(888, consumed);
    for (const auto& pt : unrelated) twin.step(pt);
    twin.reset();
    bool suffixMatches = true;
    for (const auto& pt : iidPoints(777, 100)) {
      const auto a = primary.step(pt);
      const auto b = twin.step(pt);
      suffixMatches = suffixMatches && primary.lastPValue() == twin.lastPValue() &&
                      a.has_value() == b.has_value();
    }
    check.expect(suffixMatches, "post-detection behavior must not depend on earlier history");
  }

  {  // permutation equivariance of both providers
    Rng rng(21);
    std::vector<LabeledPoint> bag;
    for (int i = 0; i < 30; ++i) {
      bag.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1)}, i % 2 == 0 ? 1 : -1});
    }
    std::vector<std::size_t> perm(bag.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<LabeledPoint> shuffled(bag.size());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = bag[perm[i]];

    const auto knnBase = knnStrangeness(bag, 2);
    const auto knnPerm = knnStrangeness(shuffled, 2);
    const auto svmBase = svmStrangeness(bag);
    const auto svmPerm = svmStrangeness(shuffled);
    bool equivariant = true;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      equivariant = equivariant && knnPerm[i] == knnBase[perm[i]] &&
                    svmPerm[i] == svmBase[perm[i]];
    }
    check.expect(equivariant, "permuting the bag must permute provider scores identically");
  }

  {  // rank sufficiency: strictly increasing transforms leave p-values alone
    Rng rng(33);
    std::vector<double> raw, transformed;
    bool same = true;
    for (int i = 0; i < 200; ++i) {
      raw.push_back(rng.uniform(0.0, 6.0));
      transformed.push_back(std::exp(raw.back()));
      const double theta = 0.37;
      same = same && computePValue(raw, theta) == computePValue(transformed, theta);
    }
    check.expect(same, "a strictly increasing score transform must preserve p-values");
  }

  {  // log-space updates agree with the direct product
    Rng rng(57);
    double logSum = 0.0;
    double direct = 1.0;
    bool agree = true;
    for (int i = 0; i < 1000; ++i) {
      const double p = rng.uniform(0.2, 1.0);
      logSum += logUpdateFactor(p, kEpsilon);
      direct *= updateFactor(p, kEpsilon);
      agree = agree && std::abs(std::exp(logSum) - direct) <= 1e-9 * direct;
    }
    check.expect(agree, "log-space martingale must match the direct product to 1e-9");
  }

  return check.done(
      "determinism, reset and history independence, permutation equivariance, "
      "rank sufficiency, log-space agreement");
}

}  // namespace

int main(int argc, char** argv) {
  int which = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      which = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }

  Outcome (*const criteria[9])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                    criterion6, criterion7, criterion8, criterion9};
  bool all = true;
  for (int n = 1; n <= 9; ++n) {
    if (which != 0 && which != n) continue;
    Outcome out;
    try {
      out = criteria[n - 1]();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    std::printf("criterion %d: %s  %s\n", n, out.pass ? "PASS" : "FAIL", out.detail.c_str());
    all = all && out.pass;
  }
  return all ? 0 : 1;
}
