#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mppchaos {

// Philox4x32-10 block function (Salmon et al., counter-based RNG).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t path_index = 0;
};

// Counter-based stream: the i-th output is a pure function of
// (master seed, stream id, i). Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(SeedSpec seed) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on (0, 1], never zero so that -log(u) is finite.
  double uniform_open_closed();
  // Uniform on [0, 1).
  double uniform();

  std::uint64_t draws() const { return counter_; }

 private:
  SeedSpec seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int buffered_ = 0;
};

}  // namespace mppchaos
