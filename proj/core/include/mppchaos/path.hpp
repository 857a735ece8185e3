#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mppchaos/model.hpp"
#include "mppchaos/rng.hpp"

namespace mppchaos {

inline constexpr std::size_t kDefaultJumpCap = 10000;

// Ordered record of (T_alpha, xi_alpha) on (0, horizon].
struct Path {
  double horizon = 1.0;
  std::vector<Jump> events;

  int size() const { return static_cast<int>(events.size()); }
  // Jumps with time strictly before t.
  std::span<const Jump> before(double t) const;
  History history_before(double t) const;
};

// Exact sequential simulation: inverse-survival inter-jump times and marks
// from the transition kernel, stopping at the horizon.
Path sample_path(const Model& model, SeedSpec seed, std::size_t jump_cap = kDefaultJumpCap);

// Paths 0..count-1 of the given master seed; identical for any worker count.
std::vector<Path> sample_paths(const Model& model, std::uint64_t master_seed, std::size_t count,
                               int workers = 1, std::size_t jump_cap = kDefaultJumpCap);

// Index alpha >= 0 with t in (T_alpha, T_{alpha+1}], T_0 = 0, T_{N+1} = +inf.
int interval_index(const Path& path, double t);

// CSV with columns path_id,alpha,time,mark (one row per jump).
void write_paths_csv(std::ostream& out, std::span<const Path> paths, const MarkSpace& marks);

// Throws if times are not strictly increasing in (0, horizon] or marks are
// outside the model's support.
void check_path(const Model& model, const Path& path);

}  // namespace mppchaos
