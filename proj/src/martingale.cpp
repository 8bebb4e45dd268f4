#include "exmart/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exmart {

double logUpdateFactor(PValue p, double epsilon) {
  if (!(p > 0.0) || p > 1.0) {
    throw std::invalid_argument("logUpdateFactor: p-value must lie in (0, 1]");
  }
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw std::invalid_argument("logUpdateFactor: epsilon must lie strictly in (0, 1)");
  }
  return std::log(epsilon) + (epsilon - 1.0) * std::log(p);
}

double updateFactor(PValue p, double epsilon) {
  return std::exp(logUpdateFactor(p, epsilon));
}

double thresholdFromDesign(const TestDesign& design) {
  design.validate();
  return (1.0 - design.beta) / design.alpha;
}

double doobFalseAlarmBound(double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("doobFalseAlarmBound: lambda must be positive");
  }
  return std::min(1.0, 1.0 / lambda);
}

double estimateMeanDelay(double lambda, double beta, std::span<const PValue> postChangePValues,
                         double epsilon) {
  if (!(lambda >= 1.0)) {
    throw std::invalid_argument("estimateMeanDelay: lambda must be at least 1");
  }
  if (beta < 0.0 || beta >= 1.0) {
    throw std::invalid_argument("estimateMeanDelay: beta must lie in [0, 1)");
  }
  if (postChangePValues.empty()) {
    throw std::invalid_argument("estimateMeanDelay: empty p-value sample");
  }
  double sum = 0.0;
  for (PValue p : postChangePValues) {
    sum += logUpdateFactor(p, epsilon);
  }
  const double meanL = sum / static_cast<double>(postChangePValues.size());
  if (meanL <= kMeanLogGrowthTol) {
    throw std::domain_error(
        "estimateMeanDelay: p-value distribution does not indicate a change; delay undefined");
  }
  return (1.0 - beta) * std::log(lambda) / meanL;
}

}  // namespace exmart
