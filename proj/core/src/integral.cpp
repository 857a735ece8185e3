#include "mppchaos/integral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mppchaos/error.hpp"
#include "mppchaos/rng.hpp"

namespace mppchaos {

Integrand::Integrand(int arity, GeneralFn general, std::optional<std::vector<FactorFn>> factors)
    : arity_(arity), general_(std::move(general)), factors_(std::move(factors)) {
  if (arity < 0) throw Error(ErrorCode::ArityMismatch, "negative arity");
  if (factors_ && static_cast<int>(factors_->size()) != arity) {
    throw Error(ErrorCode::ArityMismatch, "separable form has " + std::to_string(factors_->size()) +
                                              " factors for arity " + std::to_string(arity));
  }
  if (!general_) throw Error(ErrorCode::InvalidArgument, "integrand needs a general evaluator");
}

Integrand Integrand::constant(double value, int arity) {
  std::vector<FactorFn> factors;
  for (int i = 0; i < arity; ++i) {
    if (i == 0) {
      factors.push_back([value](double, int) { return value; });
    } else {
      factors.push_back([](double, int) { return 1.0; });
    }
  }
  return Integrand(arity, [value](std::span<const Point>) { return value; }, std::move(factors));
}

Integrand Integrand::deterministic(FactorFn f) { return separable({std::move(f)}); }

Integrand Integrand::separable(std::vector<FactorFn> factors) {
  const int n = static_cast<int>(factors.size());
  auto general = [factors](std::span<const Point> args) {
    double v = 1.0;
    for (std::size_t i = 0; i < factors.size(); ++i) v *= factors[i](args[i].time, args[i].mark);
    return v;
  };
  return Integrand(n, std::move(general), std::move(factors));
}

Integrand Integrand::predictable(PredictableFn f) {
  Integrand out;
  out.arity_ = 1;
  out.predictable_ = std::move(f);
  return out;
}

double Integrand::operator()(std::span<const Point> args) const {
  if (static_cast<int>(args.size()) != arity_) {
    throw Error(ErrorCode::ArityMismatch, "integrand of arity " + std::to_string(arity_) + " called with " +
                                              std::to_string(args.size()) + " arguments");
  }
  if (predictable_) throw Error(ErrorCode::InvalidArgument, "predictable integrand needs the path history");
  return general_(args);
}

double Integrand::at(std::span<const Jump> history, double t, int mark) const {
  if (arity_ != 1) throw Error(ErrorCode::ArityMismatch, "point evaluation needs an arity-1 integrand");
  if (predictable_) return predictable_(history, t, mark);
  const Point p{t, mark};
  return general_(std::span<const Point>(&p, 1));
}

double separable_deviation(const Integrand& g, double horizon, int num_marks, int samples, std::uint64_t seed) {
  if (!g.is_separable()) return 0.0;
  CounterRng rng({seed, 0});
  std::vector<Point> args(g.arity());
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (auto& p : args) {
      p.time = horizon * rng.uniform_open_closed();
      p.mark = static_cast<int>(rng.uniform() * num_marks);
    }
    double product = 1.0;
    for (int i = 0; i < g.arity(); ++i) product *= g.factors()[i](args[i].time, args[i].mark);
    worst = std::max(worst, std::abs(product - g(args)));
  }
  return worst;
}

namespace {

std::span<const Jump> history_before(const MeasureNodes& nodes, double t) {
  const auto it = std::lower_bound(nodes.jumps.begin(), nodes.jumps.end(), t,
                                   [](const Jump& j, double v) { return j.time < v; });
  return {nodes.jumps.data(), static_cast<std::size_t>(it - nodes.jumps.begin())};
}

// Upper integration limit: a time, open or closed, optionally tied to a
// quadrature node so that partial cell weights use the exact spectral row.
struct Limit {
  double time = 0.0;
  bool closed = true;
  int segment = -1;
  int node = -1;
};

struct PointRef {
  double time;
  int mark;
  double weight;
  int segment;  // -1 for atoms
  int node;     // -1 for atoms
  double segment_start;
};

class PointEvaluator {
 public:
  explicit PointEvaluator(const MeasureNodes& nodes) : nodes_(nodes) {
    const int m = nodes.num_marks;
    for (std::size_t s = 0; s < nodes.segments.size(); ++s) {
      const auto& seg = nodes.segments[s];
      for (std::size_t j = 0; j < seg.times.size(); ++j)
        for (int x = 0; x < m; ++x) {
          const double w = seg.cell(static_cast<int>(j), x, m);
          if (w != 0.0) {
            points_.push_back({seg.times[j], x, w, static_cast<int>(s), static_cast<int>(j), seg.start});
          }
        }
      if (seg.closed_by_atom) {
        const auto& a = nodes.atoms[seg.prior_jumps];
        points_.push_back({a.time, a.mark, a.weight, -1, -1, a.time});
      }
    }
    // Atoms not preceded by a non-empty segment cannot occur for strictly
    // increasing jump times in (0, H].
  }

  const std::vector<PointRef>& points() const { return points_; }

  // Whether every point at or after index i lies beyond the limit.
  bool beyond(const PointRef& p, const Limit& lim) const {
    if (p.segment < 0) return p.time > lim.time;
    return p.segment_start >= lim.time;
  }

  double weight(const PointRef& p, const Limit& lim) {
    if (p.segment < 0) {
      return (p.time < lim.time || (p.time == lim.time && lim.closed)) ? p.weight : 0.0;
    }
    const auto& seg = nodes_.segments[p.segment];
    if (lim.time >= seg.end) return p.weight;
    if (lim.time <= seg.start) return 0.0;
    if (lim.segment == p.segment && lim.node >= 0) return nodes_.rule->partial(lim.node, p.node) * p.weight;
    const auto key = std::make_pair(p.segment, lim.time);
    auto it = partial_cache_.find(key);
    if (it == partial_cache_.end()) {
      it = partial_cache_.emplace(key, nodes_.rule->partial_at(seg.to_reference(lim.time))).first;
    }
    return it->second[p.node] * p.weight;
  }

  static Limit open_at(const PointRef& p) { return {p.time, false, p.segment, p.node}; }

  double eval(const Integrand& g, std::span<const Point> args) const {
    if (g.arity() == 1) return g.at(history_before(nodes_, args[0].time), args[0].time, args[0].mark);
    return g(args);
  }

 private:
  const MeasureNodes& nodes_;
  std::vector<PointRef> points_;
  std::map<std::pair<int, double>, std::vector<double>> partial_cache_;
};

Limit tighter(const Limit& a, const Limit& b) { return a.time <= b.time ? a : b; }

Limit end_limit(const MeasureNodes& nodes, double tau) {
  if (tau == kInfiniteTime) return {nodes.horizon, true, -1, -1};
  if (!(tau > 0.0) || tau > nodes.horizon) {
    throw Error(ErrorCode::OutOfHorizon, "tau = " + std::to_string(tau) + " outside (0, H]");
  }
  return {tau, false, -1, -1};
}

double recursive_J(PointEvaluator& ev, const Integrand& g, int n, const Limit& lim, std::vector<Point>& args) {
  const int depth = static_cast<int>(args.size());
  if (depth == n) return ev.eval(g, args);
  double sum = 0.0;
  for (const auto& p : ev.points()) {
    if (ev.beyond(p, lim)) break;
    const double w = ev.weight(p, lim);
    if (w == 0.0) continue;
    args.push_back({p.time, p.mark});
    sum += w * recursive_J(ev, g, n, PointEvaluator::open_at(p), args);
    args.pop_back();
  }
  return sum;
}

double recursive_I(PointEvaluator& ev, const MeasureNodes& nodes, const IteratedFamily& fam, int k,
                   const Limit& lim, std::vector<Point>& args) {
  const int i = static_cast<int>(args.size());
  double value = i == 0 ? fam.g0 : ev.eval(fam.terms[i - 1], args);
  if (i == k) return value;
  // The next variable is capped (closed) by T_{k-i} when that jump exists.
  const int cap_index = k - i;
  Limit next = lim;
  if (cap_index <= static_cast<int>(nodes.atoms.size())) {
    next = tighter(lim, Limit{nodes.atoms[cap_index - 1].time, true, -1, -1});
  }
  for (const auto& p : ev.points()) {
    if (ev.beyond(p, next)) break;
    const double w = ev.weight(p, next);
    if (w == 0.0) continue;
    args.push_back({p.time, p.mark});
    value += w * recursive_I(ev, nodes, fam, k, PointEvaluator::open_at(p), args);
    args.pop_back();
  }
  return value;
}

void check_depth(int n) {
  if (n > kMaxGeneralDepth) {
    throw Error(ErrorCode::DepthTooLarge, "general integrands are evaluated recursively up to depth " +
                                              std::to_string(kMaxGeneralDepth) + ", got " + std::to_string(n));
  }
}

void check_family(const IteratedFamily& fam, int k) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "negative depth");
  if (fam.depth() < k) {
    throw Error(ErrorCode::ArityMismatch, "family has " + std::to_string(fam.depth()) + " terms, need " +
                                              std::to_string(k));
  }
  for (int i = 0; i < k; ++i) {
    if (fam.terms[i].arity() != i + 1) {
      throw Error(ErrorCode::ArityMismatch, "term " + std::to_string(i + 1) + " has arity " +
                                                std::to_string(fam.terms[i].arity()));
    }
  }
}

}  // namespace

double integrate(const MeasureNodes& nodes, const Integrand& f) {
  return integrate_window(nodes, f, 0.0, nodes.horizon);
}

double integrate_window(const MeasureNodes& nodes, const Integrand& f, double lower, double upper) {
  if (f.arity() != 1) throw Error(ErrorCode::ArityMismatch, "integrate needs an arity-1 integrand");
  if (lower < 0.0 || upper > nodes.horizon || lower > upper) {
    throw Error(ErrorCode::OutOfHorizon, "window outside [0, H]");
  }
  PointEvaluator ev(nodes);
  const Limit hi{upper, true, -1, -1};
  const Limit lo{lower, true, -1, -1};
  double sum = 0.0;
  Point arg;
  for (const auto& p : ev.points()) {
    if (ev.beyond(p, hi)) break;
    const double w = ev.weight(p, hi) - ev.weight(p, lo);
    if (w == 0.0) continue;
    arg = {p.time, p.mark};
    sum += w * ev.eval(f, std::span<const Point>(&arg, 1));
  }
  return sum;
}

double iterated_J(const MeasureNodes& nodes, int n, const Integrand& g) {
  if (g.arity() != n) {
    throw Error(ErrorCode::ArityMismatch, "J^" + std::to_string(n) + " of an arity-" + std::to_string(g.arity()) +
                                              " integrand");
  }
  if (n == 0) return g(std::span<const Point>{});
  if (g.is_separable()) {
    std::vector<FactorFn> inner_first(g.factors().rbegin(), g.factors().rend());
    std::vector<double> caps(n, kInfiniteTime);
    return sweep_chain(nodes, inner_first, caps, nodes.horizon, true);
  }
  return iterated_J_recursive(nodes, n, g);
}

double iterated_J_recursive(const MeasureNodes& nodes, int n, const Integrand& g) {
  if (g.arity() != n) {
    throw Error(ErrorCode::ArityMismatch, "J^" + std::to_string(n) + " of an arity-" + std::to_string(g.arity()) +
                                              " integrand");
  }
  check_depth(n);
  if (n == 0) return g(std::span<const Point>{});
  PointEvaluator ev(nodes);
  std::vector<Point> args;
  args.reserve(n);
  return recursive_J(ev, g, n, Limit{nodes.horizon, true, -1, -1}, args);
}

double iterated_I(const MeasureNodes& nodes, const IteratedFamily& family, double tau, int k) {
  check_family(family, k);
  const Limit end = end_limit(nodes, tau);
  bool separable = true;
  for (int i = 0; i < k; ++i) separable = separable && family.terms[i].is_separable();
  if (!separable) return iterated_I_recursive(nodes, family, tau, k);

  const int n_jumps = static_cast<int>(nodes.atoms.size());
  double value = family.g0;
  for (int i = 1; i <= k; ++i) {
    const auto& factors = family.terms[i - 1].factors();
    std::vector<FactorFn> inner_first(factors.rbegin(), factors.rend());
    // Inner-first level l is depth i-l+1, capped by T_{k-i+l}.
    std::vector<double> caps(i);
    for (int l = 1; l <= i; ++l) {
      const int j = k - i + l;
      caps[l - 1] = j <= n_jumps ? nodes.atoms[j - 1].time : kInfiniteTime;
    }
    value += sweep_chain(nodes, inner_first, caps, end.time, end.closed);
  }
  return value;
}

double iterated_I_recursive(const MeasureNodes& nodes, const IteratedFamily& family, double tau, int k) {
  check_family(family, k);
  check_depth(k);
  const Limit end = end_limit(nodes, tau);
  PointEvaluator ev(nodes);
  std::vector<Point> args;
  args.reserve(k);
  return recursive_I(ev, nodes, family, k, end, args);
}

double sweep_chain(const MeasureNodes& nodes, std::span<const FactorFn> inner_first, std::span<const double> caps,
                   double end, bool end_closed) {
  const int levels = static_cast<int>(inner_first.size());
  if (static_cast<int>(caps.size()) != levels) throw Error(ErrorCode::DimensionMismatch, "one cap per level");
  if (levels == 0) return 1.0;
  const auto& gl = *nodes.rule;
  const int q = gl.size();
  const int m = nodes.num_marks;

  std::vector<double> level(levels + 1, 0.0);
  level[0] = 1.0;
  std::vector<double> prev(q), cur(q), v(q);

  for (const auto& seg : nodes.segments) {
    if (seg.start >= end) break;
    const bool cut = end < seg.end;
    std::vector<double> partial;
    if (cut) partial = gl.partial_at(seg.to_reference(end));

    std::fill(prev.begin(), prev.end(), 1.0);
    for (int l = 1; l <= levels; ++l) {
      const bool active = seg.end <= caps[l - 1];
      if (active) {
        const auto& f = inner_first[l - 1];
        for (int i = 0; i < q; ++i) {
          double d = 0.0;
          for (int x = 0; x < m; ++x) {
            const double c = seg.cell(i, x, m);
            if (c != 0.0) d += f(seg.times[i], x) * c;
          }
          v[i] = d * prev[i];
        }
      }
      if (l < levels) {
        for (int i = 0; i < q; ++i) {
          double s = level[l];
          if (active) {
            const auto row = gl.partial_row(i);
            for (int j = 0; j < q; ++j) s += row[j] * v[j];
          }
          cur[i] = s;
        }
      }
      if (active) {
        double inc = 0.0;
        if (cut) {
          for (int j = 0; j < q; ++j) inc += partial[j] * v[j];
        } else {
          for (int j = 0; j < q; ++j) inc += v[j];
        }
        level[l] += inc;
      }
      std::swap(prev, cur);
    }
    if (cut) return level[levels];

    if (seg.closed_by_atom) {
      const auto& atom = nodes.atoms[seg.prior_jumps];
      const bool included = atom.time < end || (atom.time == end && end_closed);
      if (!included) return level[levels];
      for (int l = levels; l >= 1; --l) {
        if (atom.time <= caps[l - 1]) {
          level[l] += inner_first[l - 1](atom.time, atom.mark) * atom.weight * level[l - 1];
        }
      }
      if (atom.time == end) return level[levels];
    }
  }
  return level[levels];
}

std::vector<std::vector<double>> tuple_integrals(const MeasureNodes& nodes, std::span<const FactorFn> factors,
                                                 int max_order) {
  const int r = static_cast<int>(factors.size());
  if (max_order < 0) throw Error(ErrorCode::InvalidArgument, "negative order");
  std::vector<std::vector<double>> acc(max_order + 1);
  std::vector<std::size_t> width(max_order + 1, 1);
  for (int n = 1; n <= max_order; ++n) width[n] = width[n - 1] * static_cast<std::size_t>(r);
  for (int n = 0; n <= max_order; ++n) acc[n].assign(width[n], 0.0);
  acc[0][0] = 1.0;
  if (max_order == 0 || r == 0) return acc;

  const auto& gl = *nodes.rule;
  const int q = gl.size();
  const int m = nodes.num_marks;
  // Node values of each accumulator inside the current segment, orders < max.
  std::vector<std::vector<double>> values(max_order);
  values[0].assign(q, 1.0);
  for (int n = 1; n < max_order; ++n) values[n].assign(width[n] * q, 0.0);
  std::vector<double> d(static_cast<std::size_t>(r) * q);
  std::vector<double> v(q);
  std::vector<double> atom_value(r);

  for (const auto& seg : nodes.segments) {
    for (int f = 0; f < r; ++f)
      for (int i = 0; i < q; ++i) {
        double s = 0.0;
        for (int x = 0; x < m; ++x) {
          const double c = seg.cell(i, x, m);
          if (c != 0.0) s += factors[f](seg.times[i], x) * c;
        }
        d[static_cast<std::size_t>(f) * q + i] = s;
      }
    for (int n = 1; n <= max_order; ++n) {
      const std::size_t parents = width[n - 1];
      const auto& parent_values = values[n - 1];
      for (std::size_t idx = 0; idx < width[n]; ++idx) {
        const std::size_t f = idx / parents;
        const std::size_t parent = idx % parents;
        for (int i = 0; i < q; ++i) v[i] = d[f * q + i] * parent_values[parent * q + i];
        if (n < max_order) {
          double* out = values[n].data() + idx * q;
          for (int i = 0; i < q; ++i) {
            const auto row = gl.partial_row(i);
            double s = acc[n][idx];
            for (int j = 0; j < q; ++j) s += row[j] * v[j];
            out[i] = s;
          }
        }
        double inc = 0.0;
        for (int j = 0; j < q; ++j) inc += v[j];
        acc[n][idx] += inc;
      }
    }
    if (seg.closed_by_atom) {
      const auto& atom = nodes.atoms[seg.prior_jumps];
      for (int f = 0; f < r; ++f) atom_value[f] = factors[f](atom.time, atom.mark) * atom.weight;
      for (int n = max_order; n >= 1; --n) {
        const std::size_t parents = width[n - 1];
        for (std::size_t idx = 0; idx < width[n]; ++idx) {
          acc[n][idx] += atom_value[idx / parents] * acc[n - 1][idx % parents];
        }
      }
    }
  }
  return acc;
}

}  // namespace mppchaos
