#include "mppchaos/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "mppchaos/error.hpp"
#include "mppchaos/parallel.hpp"

namespace mppchaos {

namespace {

// Elapsed u with integrated hazard equal to target, to 1e-12 in time.
double bisect_inverse(const Model& model, int state, double target, double limit) {
  if (model.state_integrated_hazard(state, limit) < target) return std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = limit;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (model.state_integrated_hazard(state, mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

int draw_mark(const Model& model, int state, double u) {
  const int n = model.num_marks();
  double acc = 0.0;
  int last_positive = -1;
  for (int x = 0; x < n; ++x) {
    const double p = model.transition(state, x);
    if (p <= 0.0) continue;
    last_positive = x;
    acc += p;
    if (u < acc) return x;
  }
  return last_positive;
}

}  // namespace

std::span<const Jump> Path::before(double t) const {
  const auto it = std::lower_bound(events.begin(), events.end(), t,
                                   [](const Jump& j, double value) { return j.time < value; });
  return {events.data(), static_cast<std::size_t>(it - events.begin())};
}

History Path::history_before(double t) const {
  const auto prefix = before(t);
  return History{{prefix.begin(), prefix.end()}, t};
}

Path sample_path(const Model& model, SeedSpec seed, std::size_t jump_cap) {
  CounterRng rng(seed);
  Path path;
  path.horizon = model.horizon();
  const double horizon = model.horizon();
  double now = 0.0;
  int state = model.initial_state();
  while (true) {
    double next = now;
    while (next == now) {
      const double target = -std::log(rng.uniform_open_closed());
      auto elapsed = model.state_inverse_hazard(state, target);
      const double u = elapsed ? *elapsed : bisect_inverse(model, state, target, horizon - now);
      next = now + u;
    }
    if (!(next <= horizon)) break;
    if (path.events.size() + 1 >= jump_cap) {
      throw Error(ErrorCode::JumpCapExceeded,
                  "path " + std::to_string(seed.path_index) + " reached the cap of " + std::to_string(jump_cap) + " jumps");
    }
    const int mark = draw_mark(model, state, rng.uniform());
    path.events.push_back({next, mark});
    state = model.next_state(state, mark);
    now = next;
  }
  return path;
}

std::vector<Path> sample_paths(const Model& model, std::uint64_t master_seed, std::size_t count,
                               int workers, std::size_t jump_cap) {
  std::vector<Path> paths(count);
  parallel_for(count, workers, [&](std::size_t i) {
    paths[i] = sample_path(model, {master_seed, i}, jump_cap);
  });
  return paths;
}

int interval_index(const Path& path, double t) {
  return static_cast<int>(path.before(t).size());
}

void write_paths_csv(std::ostream& out, std::span<const Path> paths, const MarkSpace& marks) {
  out << "path_id,alpha,time,mark\n";
  char buffer[64];
  for (std::size_t id = 0; id < paths.size(); ++id) {
    const auto& events = paths[id].events;
    for (std::size_t a = 0; a < events.size(); ++a) {
      std::snprintf(buffer, sizeof buffer, "%.17g", events[a].time);
      out << id << ',' << a + 1 << ',' << buffer << ',' << marks.labels[events[a].mark] << '\n';
    }
  }
}

void check_path(const Model& model, const Path& path) {
  double last = 0.0;
  for (std::size_t a = 0; a < path.events.size(); ++a) {
    const auto& j = path.events[a];
    if (!(j.time > last) || !(j.time <= model.horizon())) {
      throw Error(ErrorCode::InvalidArgument, "jump times must be strictly increasing in (0, horizon]");
    }
    const auto& support = model.support(static_cast<int>(a) + 1);
    if (std::find(support.begin(), support.end(), j.mark) == support.end()) {
      throw Error(ErrorCode::InvalidArgument, "jump " + std::to_string(a + 1) + " has a mark outside the support");
    }
    last = j.time;
  }
}

}  // namespace mppchaos
