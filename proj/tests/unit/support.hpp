#pragma once

#include <gtest/gtest.h>

#include <vector>

#include "mppchaos/error.hpp"
#include "mppchaos/model.hpp"
#include "mppchaos/path.hpp"
#include "mppchaos/zeta.hpp"

namespace mppchaos::testing {

inline ModelSpec poisson_spec(double rate, std::vector<double> dist = {1.0}, double horizon = 1.0) {
  ModelSpec spec;
  spec.marks = MarkSpace::cyclic(static_cast<int>(dist.size()));
  spec.kind = MarkedPoisson{rate, std::move(dist)};
  spec.representation = Representation::JumpIncrement;
  spec.horizon = horizon;
  return spec;
}

// Two-state chain with exit rates 1 and 2, marks are increments in Z_2.
inline ModelSpec ctmc_spec(double horizon = 1.0) {
  ModelSpec spec;
  spec.marks = MarkSpace::cyclic(2);
  spec.kind = Ctmc{{{-1.0, 1.0}, {2.0, -2.0}}, 0};
  spec.representation = Representation::JumpIncrement;
  spec.horizon = horizon;
  return spec;
}

// Renewal with hazard 1 + u and a uniform two-label kernel.
inline ModelSpec renewal_spec(double horizon = 1.0) {
  ModelSpec spec;
  spec.marks = MarkSpace::plain(2);
  Renewal r;
  r.hazard = {HazardFamily::Kind::Linear, 1.0, 1.0, 1.0};
  r.kernel = {{0.5, 0.5}, {0.5, 0.5}};
  spec.kind = r;
  spec.representation = Representation::StateAfterJump;
  spec.horizon = horizon;
  return spec;
}

inline Path make_path(std::vector<Jump> jumps, double horizon = 1.0) {
  Path p;
  p.horizon = horizon;
  p.events = std::move(jumps);
  return p;
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an mppchaos::Error";
  return ErrorCode::InvalidArgument;
}

}  // namespace mppchaos::testing
