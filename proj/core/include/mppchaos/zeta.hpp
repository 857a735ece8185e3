#pragma once

#include <map>
#include <span>
#include <vector>

namespace mppchaos {

// Continuous, strictly positive time density of the reference measure.
struct TimeDensity {
  enum class Kind {
    Constant,     // 1
    Linear,       // a + b t
    Exponential,  // exp(b t)
  };
  Kind kind = Kind::Constant;
  double a = 1.0;
  double b = 0.0;

  double operator()(double t) const;
};

// Reference measure zeta^alpha(dt, dx) = scale * density(t) dt * nu_alpha(dx).
struct ZetaSpec {
  enum class MarkReference {
    UniformOnSupport,  // nu_alpha uniform on support_marks(alpha), total mass 1
    Explicit,          // nu_alpha = mark_weights for every alpha
  };

  TimeDensity density;
  double scale = 1.0;
  MarkReference mark_reference = MarkReference::UniformOnSupport;
  std::vector<double> mark_weights;
  // Per-jump-index override of nu_alpha (alpha is 1-based).
  std::map<int, std::vector<double>> overrides;

  double time_weight(double t) const { return scale * density(t); }

  // nu_alpha over all labels, given the deterministic support of jump alpha.
  std::vector<double> mark_measure(int jump_index, std::span<const int> support,
                                   int num_marks) const;

  bool is_unit_lebesgue() const {
    return density.kind == TimeDensity::Kind::Constant && scale == 1.0;
  }
};

}  // namespace mppchaos
