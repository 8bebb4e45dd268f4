#include "exmart/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace exmart {
namespace {

double squaredDistance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

constexpr double kTau = 1e-12;

}  // namespace

double SvmModel::decision(const std::vector<double>& x) const {
  double f = bias;
  for (std::size_t i = 0; i < svX.size(); ++i) {
    f += svCoef[i] * std::exp(-gamma * squaredDistance(svX[i], x));
  }
  return f;
}

std::optional<SvmModel> trainSvm(const std::vector<LabeledPoint>& points,
                                 const SvmTrainConfig& cfg) {
  const std::size_t n = points.size();
  if (n < 2) return std::nullopt;
  bool hasPos = false;
  bool hasNeg = false;
  for (const auto& pt : points) {
    if (pt.label > 0) {
      hasPos = true;
    } else if (pt.label < 0) {
      hasNeg = true;
    } else {
      throw std::invalid_argument("trainSvm: labels must be +1 or -1");
    }
  }
  if (!hasPos || !hasNeg) return std::nullopt;

  // A canonical point order makes the trained model independent of how the
  // caller happened to arrange the bag, so downstream scores are exactly
  // permutation-invariant.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].features != points[b].features) return points[a].features < points[b].features;
    return points[a].label < points[b].label;
  });

  const std::size_t dim = points[0].features.size();
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / static_cast<double>(std::max<std::size_t>(dim, 1));
  const double c = cfg.c;
  const std::size_t maxIter = cfg.maxIter > 0 ? cfg.maxIter : std::max<std::size_t>(200000, 100 * n);

  std::vector<const std::vector<double>*> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = &points[order[i]].features;
    y[i] = points[order[i]].label > 0 ? 1.0 : -1.0;
  }

  // Q[i][j] = y_i y_j K(x_i, x_j); bag sizes stay small enough for a dense
  // Gram matrix.
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    q[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = std::exp(-gamma * squaredDistance(*x[i], *x[j]));
      q[i][j] = y[i] * y[j] * k;
      q[j][i] = q[i][j];
    }
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);

  double gmax = 0.0;
  double gmin = 0.0;
  for (std::size_t iter = 0;; ++iter) {
    // Working-set selection: first index maximizes -y_t grad_t over I_up,
    // second minimizes the second-order gain over I_low.
    gmax = -std::numeric_limits<double>::infinity();
    gmin = std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const bool inUp = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
      if (inUp) {
        const double v = -y[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          i = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    std::ptrdiff_t j = -1;
    double objMin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const bool inLow = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
      if (!inLow) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i >= 0 && v < gmax) {
        const double gradDiff = gmax - v;
        const std::size_t ui = static_cast<std::size_t>(i);
        double a = q[ui][ui] + q[t][t] - 2.0 * y[ui] * y[t] * q[ui][t];
        if (a <= 0.0) a = kTau;
        const double obj = -(gradDiff * gradDiff) / a;
        if (obj <= objMin) {
          objMin = obj;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (i < 0 || j < 0 || gmax - gmin <= cfg.tol || iter >= maxIter) break;

    const std::size_t ui = static_cast<std::size_t>(i);
    const std::size_t uj = static_cast<std::size_t>(j);
    const double oldAi = alpha[ui];
    const double oldAj = alpha[uj];

    if (y[ui] != y[uj]) {
      double quad = q[ui][ui] + q[uj][uj] + 2.0 * q[ui][uj];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0.0) {
        if (alpha[uj] < 0.0) {
          alpha[uj] = 0.0;
          alpha[ui] = diff;
        }
        if (alpha[ui] > c) {
          alpha[ui] = c;
          alpha[uj] = c - diff;
        }
      } else {
        if (alpha[ui] < 0.0) {
          alpha[ui] = 0.0;
          alpha[uj] = -diff;
        }
        if (alpha[uj] > c) {
          alpha[uj] = c;
          alpha[ui] = c + diff;
        }
      }
    } else {
      double quad = q[ui][ui] + q[uj][uj] - 2.0 * q[ui][uj];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > c) {
        if (alpha[ui] > c) {
          alpha[ui] = c;
          alpha[uj] = sum - c;
        }
        if (alpha[uj] > c) {
          alpha[uj] = c;
          alpha[ui] = sum - c;
        }
      } else {
        if (alpha[uj] < 0.0) {
          alpha[uj] = 0.0;
          alpha[ui] = sum;
        }
        if (alpha[ui] < 0.0) {
          alpha[ui] = 0.0;
          alpha[uj] = sum;
        }
      }
    }

    const double dAi = alpha[ui] - oldAi;
    const double dAj = alpha[uj] - oldAj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += q[ui][t] * dAi + q[uj][t] * dAj;
    }
  }

  // Bias from the KKT conditions: -y_t grad_t equals the bias at every free
  // support vector; with none free, split the bound-derived bracket.
  double freeSum = 0.0;
  std::size_t freeCount = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < c) {
      freeSum += -y[t] * grad[t];
      ++freeCount;
    }
  }
  SvmModel model;
  model.gamma = gamma;
  model.bias = freeCount > 0 ? freeSum / static_cast<double>(freeCount) : (gmax + gmin) / 2.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.svX.push_back(*x[t]);
      model.svCoef.push_back(alpha[t] * y[t]);
    }
  }
  return model;
}

}  // namespace exmart
