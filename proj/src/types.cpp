#include "exmart/types.hpp"

namespace exmart {

void DetectorConfig::validate() const {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
    throw ConfigError("detector config: epsilon must lie strictly in (0, 1)");
  }
  if (!(lambda > 1.0)) {
    throw ConfigError("detector config: lambda must exceed 1");
  }
  if (windowCap && *windowCap == 0) {
    throw ConfigError("detector config: windowCap must be positive when set");
  }
  if (retrainEvery == 0) {
    throw ConfigError("detector config: retrainEvery must be positive");
  }
}

void TestDesign::validate() const {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw ConfigError("test design: alpha must lie strictly in (0, 1)");
  }
  if (beta < 0.0 || beta >= 1.0) {
    throw ConfigError("test design: beta must lie in [0, 1)");
  }
}

}  // namespace exmart
