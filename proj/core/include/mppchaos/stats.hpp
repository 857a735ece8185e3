#pragma once

#include <cstddef>
#include <span>

namespace mppchaos {

struct McStats {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;   // 95% normal interval
  double ci_high = 0.0;
  std::size_t count = 0;
};

// Sample mean, standard error from the unbiased variance, and a 95% normal
// interval. Summation runs in input order.
McStats mc_stats(std::span<const double> samples);

}  // namespace mppchaos
