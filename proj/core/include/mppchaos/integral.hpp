#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mppchaos/martingale.hpp"

namespace mppchaos {

struct Point {
  double time = 0.0;
  int mark = 0;
};

using FactorFn = std::function<double(double t, int mark)>;
using GeneralFn = std::function<double(std::span<const Point> args)>;
// Arity-1 predictable integrand: receives the jumps strictly before t.
using PredictableFn = std::function<double(std::span<const Jump> history, double t, int mark)>;

// Integrand of arity n on ((t_1, x_1), ..., (t_n, x_n)), t_1 the outermost
// (latest) time variable.
class Integrand {
 public:
  // General evaluator with an optional separable form (factors outer-first).
  Integrand(int arity, GeneralFn general, std::optional<std::vector<FactorFn>> factors = std::nullopt);

  static Integrand constant(double value, int arity);
  static Integrand deterministic(FactorFn f);
  static Integrand separable(std::vector<FactorFn> factors);
  static Integrand predictable(PredictableFn f);

  int arity() const { return arity_; }
  bool is_separable() const { return factors_.has_value(); }
  bool is_predictable() const { return static_cast<bool>(predictable_); }
  const std::vector<FactorFn>& factors() const { return *factors_; }

  double operator()(std::span<const Point> args) const;
  // Arity-1 evaluation with the pre-t history (ignored unless predictable).
  double at(std::span<const Jump> history, double t, int mark) const;

 private:
  Integrand() = default;

  int arity_ = 1;
  GeneralFn general_;
  std::optional<std::vector<FactorFn>> factors_;
  PredictableFn predictable_;
};

// Largest |separable - general| over random points in ((0, horizon] x E)^n.
double separable_deviation(const Integrand& g, double horizon, int num_marks, int samples,
                           std::uint64_t seed);

// Family {g_0, g_1, ..., g_k} for the capped iterated operator; terms[i-1]
// has arity i.
struct IteratedFamily {
  double g0 = 0.0;
  std::vector<Integrand> terms;

  int depth() const { return static_cast<int>(terms.size()); }
};

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();
inline constexpr int kMaxGeneralDepth = 4;

// int f dm over (0, H].
double integrate(const MeasureNodes& nodes, const Integrand& f);
// int f dm over (lower, upper].
double integrate_window(const MeasureNodes& nodes, const Integrand& f, double lower, double upper);

// n-fold integral over the ordered simplex 0 <= s_n < ... < s_1 <= H.
// Separable integrands use the single-sweep evaluator, general ones the
// recursive evaluator (n <= 4).
double iterated_J(const MeasureNodes& nodes, int n, const Integrand& g);
// Recursive evaluator for any integrand (n <= 4); used to cross-check the sweep.
double iterated_J_recursive(const MeasureNodes& nodes, int n, const Integrand& g);

// I^k_tau: g_0 + int_{(0, T_k] cap (0, tau)} I^{k-1}_t(...) dm, inner levels
// capped by earlier jump times (closed) and the running outer time (open).
// tau = kInfiniteTime means the closed horizon.
double iterated_I(const MeasureNodes& nodes, const IteratedFamily& family, double tau, int k);
double iterated_I_recursive(const MeasureNodes& nodes, const IteratedFamily& family, double tau, int k);

// Nested integrals of a factor chain given innermost-first:
//   B_1(t) = int_{(0,t] cap (0,caps[0]]} f_1 dm,
//   B_l(t) = int_{(0,t] cap (0,caps[l-1]]} f_l(s) B_{l-1}(s-) dm(s),
// evaluated at `end` (closed or open). Returns B_L(end).
double sweep_chain(const MeasureNodes& nodes, std::span<const FactorFn> inner_first,
                   std::span<const double> caps, double end, bool end_closed);

// All iterated integrals of tuples over a finite factor set, up to order
// `max_order`, in one sweep. Result[n] is indexed by the tuple (f_1..f_n)
// outer-first read as base-|factors| digits with f_1 most significant.
std::vector<std::vector<double>> tuple_integrals(const MeasureNodes& nodes, std::span<const FactorFn> factors,
                                                 int max_order);

}  // namespace mppchaos
