// Physical constants, injected everywhere instead of hard-coded so that
// c = 1 toy systems stay expressible.

#pragma once

#include "logsync/errors.hpp"

namespace logsync {

struct PhysicalConstants {
  double c = 299792458.0;  // speed of light [m/s]
  double G = 6.674e-11;    // gravitational constant [m^3/(kg s^2)]

  static PhysicalConstants si() { return {}; }
  static PhysicalConstants natural() { return {1.0, 1.0}; }

  void validate() const {
    std::vector<std::string> bad;
    if (!(c > 0.0)) bad.push_back("constants: c must be positive");
    if (!(G > 0.0)) bad.push_back("constants: G must be positive");
    if (!bad.empty()) throw validation_error(bad);
  }
};

}  // namespace logsync
