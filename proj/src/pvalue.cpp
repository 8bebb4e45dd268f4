#include "exmart/pvalue.hpp"

#include <cstddef>
#include <stdexcept>

namespace exmart {

PValue computePValue(std::span<const StrangenessScore> scores, double theta) {
  if (scores.empty()) {
    throw std::invalid_argument("computePValue: empty score bag");
  }
  if (!(theta > 0.0) || !(theta < 1.0)) {
    throw std::invalid_argument("computePValue: theta must lie strictly in (0, 1)");
  }
  const StrangenessScore alphaN = scores.back();
  std::size_t greater = 0;
  std::size_t equal = 0;
  for (StrangenessScore a : scores) {
    if (a > alphaN) {
      ++greater;
    } else if (a == alphaN) {
      ++equal;
    }
  }
  return (static_cast<double>(greater) + theta * static_cast<double>(equal)) /
         static_cast<double>(scores.size());
}

}  // namespace exmart
