#pragma once

#include <functional>
#include <vector>

#include "mppchaos/chaos.hpp"
#include "mppchaos/functional.hpp"
#include "mppchaos/martingale.hpp"
#include "mppchaos/model.hpp"

namespace mppchaos {

struct OracleConfig {
  int n_max = 30;             // largest jump count resolved explicitly
  int quad_nodes = 32;        // quadrature / interpolation nodes per time dimension
  double tolerance = 1e-8;    // largest admissible truncation bound
  int ode_steps = 1000;       // RK4 steps on [0, H] for chaos tails
  bool closed_form = true;    // use marked Poisson closed forms when available
};

struct OracleValue {
  double value = 0.0;
  double error_bound = 0.0;
};

// Law of (N_t, X_t) built from the densities phi_n(t, s) of the n-th jump
// time with post-jump state s:
//   phi_1(t, s')     = sum_x [next(s0,x)=s'] h_{s0}(t) S_{s0}(t) K(s0, x)
//   phi_{n+1}(t, s') = sum_{s,x} [next(s,x)=s'] K(s,x) int_0^t phi_n(u,s) h_s(t-u) S_s(t-u) du
// Each phi_n(., s) is held by barycentric interpolation on Chebyshev points.
class JumpLaw {
 public:
  explicit JumpLaw(const Model& model, OracleConfig cfg = {});

  const Model& model() const { return *model_; }
  const OracleConfig& config() const { return cfg_; }
  int n_max() const { return cfg_.n_max; }

  double jump_density(int n, int state, double t) const;
  // P(N_t = n, X_t = state)
  double occupancy(int n, int state, double t) const;
  // P(N_t = n) = P(t in (T_n, T_{n+1}])
  double occupancy(int n, double t) const;
  // E[1{N_t = n, X_t = state} g(t - T_n)], T_0 = 0.
  double occupancy_weighted(int n, int state, double t, const std::function<double(double)>& elapsed_weight) const;

  // Upper bound on sum_{n > n_max} growth(n) P(N_H = n) from a Poisson
  // dominating count with rate hazard_bound().
  double tail_bound(const std::function<double(int)>& growth) const;
  double truncation_probability() const;

 private:
  bool poisson_closed_form() const;
  double poisson_rate() const;

  const Model* model_;
  OracleConfig cfg_;
  ChebyshevGrid grid_;
  std::shared_ptr<const GaussLegendre> rule_;
  // phi_[n-1][state * points + k]
  std::vector<std::vector<double>> phi_;
};

double occupancy_probability(const Model& model, int alpha, double t, OracleConfig cfg = {});

// E[Y] by jump-count enumeration; throws TruncationTooLarge when the bound
// exceeds cfg.tolerance.
OracleValue oracle_expectation(const Model& model, const Functional& functional, OracleConfig cfg = {});

// sum_alpha int_0^H sum_x P(N_t = alpha) f g w(t) nu_{alpha+1}(x) dt.
OracleValue zeta_inner_product(const FactorFn& f, const FactorFn& g, const Model& model, const ZetaSpec& zeta,
                               OracleConfig cfg = {});
// sum_alpha int sum_x E[1{N_t = alpha} psi(t, x)] f g dzeta^{alpha+1}: the
// second moment of int f dm when dm = psi dq.
OracleValue psi_weighted_inner_product(const FactorFn& f, const FactorFn& g, const Model& model,
                                       const ZetaSpec& zeta, OracleConfig cfg = {});
// sum_alpha int sum_x P(N_t = alpha) f dzeta^{alpha+1}
OracleValue zeta_integral(const FactorFn& f, const Model& model, const ZetaSpec& zeta, OracleConfig cfg = {});

struct ChaosTail {
  std::vector<double> residual_fraction;  // r_0..r_K
  double mean = 0.0;
  double variance = 0.0;
  double error_bound = 0.0;  // truncation bound on the second moments, relative to the variance
  std::vector<int> pruned_factors;  // factors whose mark never carries compensator mass
};

// Exact residual fractions of the projection of Y on the basis spans of
// orders <= m, for Markov models (hazard constant per state) and
// functionals of (N_H, X_H). Second moments of all iterated integrals are
// propagated by a forward moment equation over (jump count, state).
ChaosTail chaos_tail(const Model& model, const ZetaSpec& zeta, const Functional& functional,
                     const ChaosBasis& basis, RescaleMode mode = RescaleMode::SqrtPsi, OracleConfig cfg = {});

}  // namespace mppchaos
