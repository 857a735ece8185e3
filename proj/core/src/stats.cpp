#include "mppchaos/stats.hpp"

#include <cmath>
#include <string>

#include "mppchaos/error.hpp"

namespace mppchaos {

McStats mc_stats(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples, got " + std::to_string(n));
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  constexpr double z95 = 1.959963984540054;
  return {mean, se, mean - z95 * se, mean + z95 * se, n};
}

}  // namespace mppchaos
