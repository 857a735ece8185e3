#include "mppchaos/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

#include "mppchaos/error.hpp"
#include "mppchaos/integral.hpp"
#include "mppchaos/oracle.hpp"
#include "mppchaos/parallel.hpp"
#include "mppchaos/stats.hpp"

namespace mppchaos {

namespace {

// Per-path samples of k statistics, reduced column by column in path order.
std::vector<McStats> path_stats(std::size_t n, std::size_t k, int workers,
                                const std::function<void(std::size_t, std::span<double>)>& body) {
  std::vector<double> data(n * k, 0.0);
  parallel_for(n, workers, [&](std::size_t i) { body(i, {data.data() + i * k, k}); });
  std::vector<McStats> out;
  std::vector<double> column(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = data[i * k + j];
    out.push_back(mc_stats(column));
  }
  return out;
}

// Largest per-path value of k deviations.
std::vector<double> path_max(std::size_t n, std::size_t k, int workers,
                             const std::function<void(std::size_t, std::span<double>)>& body) {
  std::vector<double> data(n * k, 0.0);
  parallel_for(n, workers, [&](std::size_t i) { body(i, {data.data() + i * k, k}); });
  std::vector<double> out(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out[j] = std::max(out[j], data[i * k + j]);
  return out;
}

struct NamedFactor {
  std::string name;
  FactorFn f;
};

bool mark_used(const Model& model, int x) {
  for (int s = 0; s < model.num_states(); ++s)
    if (model.transition(s, x) > 0.0) return true;
  return false;
}

std::vector<NamedFactor> test_functions(const Model& model) {
  std::vector<NamedFactor> out;
  out.push_back({"one", [](double, int) { return 1.0; }});
  out.push_back({"t", [](double t, int) { return t; }});
  for (int x = 0; x < model.num_marks(); ++x) {
    if (!mark_used(model, x)) continue;
    out.push_back({"mark=" + model.spec().marks.labels[x], [x](double, int y) { return y == x ? 1.0 : 0.0; }});
  }
  return out;
}

// psi at (t, x) from the jumps strictly before t.
double psi_from_history(const Model& model, const ReferenceMeasure& ref, std::span<const Jump> history, double t,
                        int x) {
  const int state = model.state_after(history);
  const double last = history.empty() ? 0.0 : history.back().time;
  const double rho = model.state_hazard(state, t - last) * model.transition(state, x);
  const auto& nu = ref.marks(static_cast<int>(history.size()) + 1);
  return ref.time_weight(t) * nu[x] / rho;
}

bool unit_reference(const ZetaSpec& zeta, const ReferenceMeasure& ref, int jumps) {
  if (!zeta.is_unit_lebesgue()) return false;
  for (int a = 1; a <= jumps + 1; ++a) {
    const auto& nu = ref.marks(a);
    if (std::abs(std::accumulate(nu.begin(), nu.end(), 0.0) - 1.0) > 1e-12) return false;
  }
  return true;
}

// Floating-point slack on top of the truncation bound when summing occupancies.
constexpr double kOccupancyRoundoff = 1e-12;

double factorial(int n) { return std::tgamma(n + 1.0); }

std::string order_pair(int m, int n) { return "J" + std::to_string(m) + "xJ" + std::to_string(n); }

}  // namespace

void martingale_suite(const SuiteConfig& cfg, const Model& model, std::span<const Path> paths, Report& report) {
  const ReferenceMeasure ref(model, cfg.zeta);
  const auto one = Integrand::deterministic([](double, int) { return 1.0; });
  const auto time = Integrand::deterministic([](double t, int) { return t; });
  const auto j2 = Integrand::constant(1.0, 2);
  const auto j3 = Integrand::constant(1.0, 3);
  const auto stats = path_stats(paths.size(), 5, cfg.sim.workers, [&](std::size_t i, std::span<double> out) {
    const auto nodes = measure_nodes(model, ref, paths[i], cfg.quad, cfg.mode);
    out[0] = integrate(nodes, one);
    out[1] = integrate(nodes, time);
    out[2] = iterated_J(nodes, 2, j2);
    out[3] = iterated_J(nodes, 3, j3);
    const auto raw = measure_nodes(model, ref, paths[i], cfg.quad, RescaleMode::None);
    out[4] = raw.total_atom_mass() + raw.total_cell_mass();
  });
  const std::string mode = to_string(cfg.mode);
  const char* names[] = {"int_1", "int_t", "J2_1", "J3_1"};
  for (int k = 0; k < 4; ++k) {
    report.add(statistical_row(std::string("martingale.") + names[k], "mean[" + mode + "]", stats[k].mean,
                               stats[k].std_error, 0.0, 0.0, cfg.tolerance.z, "exact_identity:zero_mean"));
  }
  report.add(statistical_row("martingale.compensation", "mean[atoms-compensator]", stats[4].mean, stats[4].std_error,
                             0.0, 0.0, cfg.tolerance.z, "exact_identity:zero_mean"));
}

void isometry_suite(const SuiteConfig& cfg, const Model& model, std::span<const Path> paths, Report& report) {
  const ReferenceMeasure ref(model, cfg.zeta);
  const auto fns = test_functions(model);
  const std::size_t nf = fns.size();
  const bool unit = unit_reference(cfg.zeta, ref, cfg.oracle.n_max);
  const std::size_t simplex = unit ? 3 : 0;
  const std::size_t transfer = 2;
  std::vector<Integrand> integrands;
  for (const auto& f : fns) integrands.push_back(Integrand::deterministic(f.f));
  const auto j2 = Integrand::constant(1.0, 2);
  const auto j3 = Integrand::constant(1.0, 3);

  const std::size_t k = 2 * nf + simplex + transfer;
  const auto stats = path_stats(paths.size(), k, cfg.sim.workers, [&](std::size_t i, std::span<double> out) {
    const auto sqrt_nodes = measure_nodes(model, ref, paths[i], cfg.quad, RescaleMode::SqrtPsi);
    const auto psi_nodes = measure_nodes(model, ref, paths[i], cfg.quad, RescaleMode::Psi);
    for (std::size_t j = 0; j < nf; ++j) {
      const double a = integrate(sqrt_nodes, integrands[j]);
      const double b = integrate(psi_nodes, integrands[j]);
      out[j] = a * a;
      out[nf + j] = b * b;
    }
    std::size_t o = 2 * nf;
    if (unit) {
      const double v1 = integrate(sqrt_nodes, integrands[0]);
      const double v2 = iterated_J(sqrt_nodes, 2, j2);
      const double v3 = iterated_J(sqrt_nodes, 3, j3);
      out[o++] = v1 * v1;
      out[o++] = v2 * v2;
      out[o++] = v3 * v3;
    }
    // int f psi dp~ = -sum over psi-mode cells of f * weight
    double s1 = 0.0, st = 0.0;
    for (const auto& seg : psi_nodes.segments)
      for (std::size_t j = 0; j < seg.times.size(); ++j)
        for (int x = 0; x < psi_nodes.num_marks; ++x) {
          const double c = seg.cell(static_cast<int>(j), x, psi_nodes.num_marks);
          s1 -= c;
          st -= c * seg.times[j];
        }
    out[o++] = s1;
    out[o++] = st;
  });

  for (std::size_t j = 0; j < nf; ++j) {
    const auto zeta_form = zeta_inner_product(fns[j].f, fns[j].f, model, cfg.zeta, cfg.oracle);
    report.add(statistical_row("isometry.sqrt_psi." + fns[j].name, "mean[(int f dm)^2]", stats[j].mean,
                               stats[j].std_error, zeta_form.value, zeta_form.error_bound, cfg.tolerance.z,
                               "oracle:zeta_inner_product"));
  }
  if (unit) {
    const auto mass = zeta_inner_product(fns[0].f, fns[0].f, model, cfg.zeta, cfg.oracle);
    report.add(exact_row("isometry.zeta_unit_mass", "zeta_inner_product(1,1)", mass.value, model.horizon(),
                         cfg.tolerance.exact + mass.error_bound, "closed_form:H"));
  }
  for (std::size_t j = 0; j < nf; ++j) {
    const auto zeta_form = zeta_inner_product(fns[j].f, fns[j].f, model, cfg.zeta, cfg.oracle);
    const auto stray = psi_weighted_inner_product(fns[j].f, fns[j].f, model, cfg.zeta, cfg.oracle);
    const auto& s = stats[nf + j];
    report.add(statistical_row("isometry.psi." + fns[j].name + ".stray_correction",
                               "mean[(int f dq_psi)^2]-zeta_form", s.mean - zeta_form.value, s.std_error,
                               stray.value - zeta_form.value, stray.error_bound + zeta_form.error_bound,
                               cfg.tolerance.z, "oracle:psi_weighted_inner_product"));
    report.add(info_row("isometry.psi." + fns[j].name + ".zeta_form_deviation", "mean[(int f dq_psi)^2]", s.mean,
                        s.std_error, zeta_form.value, "oracle:zeta_inner_product"));
  }
  std::size_t o = 2 * nf;
  if (unit) {
    for (int n = 1; n <= 3; ++n, ++o) {
      const double target = std::pow(model.horizon(), n) / factorial(n);
      report.add(statistical_row("isometry.simplex_volume.J" + std::to_string(n), "mean[J^n(1)^2]", stats[o].mean,
                                 stats[o].std_error, target, 0.0, cfg.tolerance.z, "closed_form:H^n/n!"));
    }
  }
  const NamedFactor transfer_fns[] = {fns[0], fns[1]};
  for (const auto& f : transfer_fns) {
    const auto target = zeta_integral(f.f, model, cfg.zeta, cfg.oracle);
    report.add(statistical_row("isometry.psi_transfer." + f.name, "mean[int f psi dp~]", stats[o].mean,
                               stats[o].std_error, target.value, target.error_bound, cfg.tolerance.z,
                               "oracle:zeta_integral"));
    ++o;
  }
}

void orthogonality_suite(const SuiteConfig& cfg, const Model& model, std::span<const Path> paths, Report& report) {
  constexpr int kOrder = 3;
  constexpr int kPairs = 5;
  const auto basis = build_basis(kOrder, cfg.chaos.time_degree, model.num_marks(), model.horizon());
  const ReferenceMeasure ref(model, cfg.zeta);
  std::vector<int> active;
  for (int f = 0; f < static_cast<int>(basis.factors().size()); ++f)
    if (mark_used(model, basis.factors()[f].mark)) active.push_back(f);
  const auto r = static_cast<std::size_t>(active.size());

  // Random elements over active factors: (order, index into the full basis).
  CounterRng rng({cfg.sim.seed, ~std::uint64_t{0}});
  auto random_element = [&](int order) {
    std::size_t index = 0;
    for (int i = 0; i < order; ++i) {
      const auto pick = std::min<std::size_t>(static_cast<std::size_t>(rng.uniform() * r), r - 1);
      index = index * basis.factors().size() + static_cast<std::size_t>(active[pick]);
    }
    return index;
  };
  struct Pair {
    int m, n;
    std::size_t a, b;
  };
  std::vector<Pair> pairs;
  for (int m = 0; m <= kOrder; ++m)
    for (int n = m + 1; n <= kOrder; ++n)
      for (int p = 0; p < kPairs; ++p) pairs.push_back({m, n, random_element(m), random_element(n)});

  // Per order, the distinct elements drawn, for the within-order Gram check.
  std::vector<std::vector<std::size_t>> drawn(kOrder + 1);
  for (const auto& p : pairs) {
    drawn[p.m].push_back(p.a);
    drawn[p.n].push_back(p.b);
  }
  for (auto& d : drawn) {
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
  }
  std::size_t gram_entries = 0;
  for (const auto& d : drawn) gram_entries += d.size() * d.size();

  const auto factors = basis.factor_functions();
  const std::size_t k = pairs.size() + gram_entries;
  const auto stats = path_stats(paths.size(), k, cfg.sim.workers, [&](std::size_t i, std::span<double> out) {
    const auto nodes = measure_nodes(model, ref, paths[i], cfg.quad, cfg.mode);
    const auto acc = tuple_integrals(nodes, factors, kOrder);
    std::size_t o = 0;
    for (const auto& p : pairs) out[o++] = acc[p.m][p.a] * acc[p.n][p.b];
    for (int n = 0; n <= kOrder; ++n)
      for (auto a : drawn[n])
        for (auto b : drawn[n]) out[o++] = acc[n][a] * acc[n][b];
  });

  std::size_t o = 0;
  for (const auto& p : pairs) {
    const auto key = order_pair(p.m, p.n);
    int count = 0;
    for (std::size_t q = 0; q < o; ++q)
      if (pairs[q].m == p.m && pairs[q].n == p.n) ++count;
    report.add(statistical_row("orthogonality." + key + ".pair" + std::to_string(count + 1),
                               "mean[J^m(f)J^n(g)]", stats[o].mean, stats[o].std_error, 0.0, 0.0, cfg.tolerance.z,
                               "exact_identity:cross_order_orthogonality"));
    ++o;
  }
  for (int n = 0; n <= kOrder; ++n) {
    const auto d = static_cast<Eigen::Index>(drawn[n].size());
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) g(a, b) = stats[o++].mean;
    double lo = 0.0, hi = 0.0;
    if (d > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
      lo = eig.eigenvalues().minCoeff();
      hi = eig.eigenvalues().cwiseAbs().maxCoeff();
    }
    const double floor = std::min(lo, 0.0);
    report.add(exact_row("orthogonality.gram_psd.order" + std::to_string(n), "min(0,lambda_min)/lambda_max",
                         hi > 0.0 ? floor / hi : 0.0, 0.0, cfg.tolerance.exact, "exact_identity:gram_psd"));
  }
}

void completeness_suite(const SuiteConfig& cfg, const Model& model, std::span<const Path> paths, Report& report) {
  std::vector<Functional> functionals;
  for (const auto& name : cfg.chaos.functionals) functionals.push_back(functional_by_name(name, model.horizon()));
  if (functionals.empty()) return;
  CompletenessOptions opt;
  opt.max_order = cfg.chaos.max_order;
  opt.time_degree = cfg.chaos.time_degree;
  opt.ridge = cfg.chaos.ridge;
  opt.quad = cfg.quad;
  opt.mode = cfg.mode;
  opt.workers = cfg.sim.workers;
  opt.oracle = cfg.oracle;
  opt.z = cfg.tolerance.z;
  opt.thresholds = cfg.chaos.thresholds;
  const auto result = completeness_report(model, cfg.zeta, paths, functionals, opt);

  for (const auto& f : functionals) {
    std::vector<const CompletenessEntry*> entries;
    for (const auto& e : result.entries)
      if (e.functional == f.name) entries.push_back(&e);
    for (const auto* e : entries) {
      const std::string test = "completeness." + f.name + ".r" + std::to_string(e->order);
      if (e->threshold) {
        report.add(threshold_row(test, "residual_fraction<threshold", e->residual_fraction, e->std_error,
                                 *e->threshold));
      } else if (e->oracle_value) {
        report.add(statistical_row(test, "residual_fraction", e->residual_fraction, e->std_error, *e->oracle_value,
                                   e->oracle_bound, cfg.tolerance.z, "oracle:chaos_tail"));
      } else {
        report.add(info_row(test, "residual_fraction", e->residual_fraction, e->std_error,
                            std::numeric_limits<double>::quiet_NaN(), "none"));
      }
    }
    double worst = -std::numeric_limits<double>::infinity();
    double steepest = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m + 1 < entries.size(); ++m) {
      const double se = std::hypot(entries[m]->std_error, entries[m + 1]->std_error);
      worst = std::max(worst, entries[m + 1]->residual_fraction - entries[m]->residual_fraction - cfg.tolerance.z * se);
      steepest = std::max(steepest, entries[m + 1]->residual_fraction - entries[m]->residual_fraction);
    }
    if (entries.size() > 1) {
      ReportRow row = threshold_row("completeness." + f.name + ".monotone", "max(r_{m+1}-r_m-z*se)", worst, 0.0, 0.0);
      row.status = worst <= 0.0 ? RowStatus::Pass : RowStatus::Fail;
      row.provenance = "exact_identity:residual_monotonicity";
      report.add(row);
      if (std::find(cfg.chaos.strictly_decreasing.begin(), cfg.chaos.strictly_decreasing.end(), f.name) !=
          cfg.chaos.strictly_decreasing.end()) {
        ReportRow dec = threshold_row("completeness." + f.name + ".strictly_decreasing", "max(r_{m+1}-r_m)",
                                      steepest, 0.0, 0.0);
        dec.provenance = "threshold:strict_decrease";
        report.add(dec);
      }
    }
  }
  report.add(info_row("completeness.gram_condition", "condition_number", result.condition_number, 0.0,
                      std::numeric_limits<double>::quiet_NaN(), "diagnostic"));
  report.add(info_row("completeness.dropped_columns", "zero_columns", static_cast<double>(result.dropped_columns),
                      0.0, std::numeric_limits<double>::quiet_NaN(), "diagnostic"));
}

void oracle_suite(const SuiteConfig& cfg, const Model& model, std::span<const Path> paths, Report& report) {
  const double H = model.horizon();
  std::vector<Functional> functionals = {count_functional(), count_squared_functional(), exp_neg_count_functional(),
                                         first_jump_functional(H)};
  for (const auto& name : cfg.chaos.functionals) {
    auto f = functional_by_name(name, H);
    const bool present = std::any_of(functionals.begin(), functionals.end(),
                                     [&](const Functional& g) { return g.name == f.name; });
    if (!present) functionals.push_back(f);
  }

  std::vector<std::optional<OracleValue>> values;
  for (const auto& f : functionals) {
    try {
      values.push_back(oracle_expectation(model, f, cfg.oracle));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TruncationTooLarge) throw;
      values.push_back(std::nullopt);
      report.add(exact_row("oracle.truncation." + f.name, "truncation_bound", std::numeric_limits<double>::infinity(),
                           0.0, cfg.oracle.tolerance, "oracle:truncation"));
    }
  }

  if (const auto* p = std::get_if<MarkedPoisson>(&model.spec().kind)) {
    const double mu = p->rate * H;
    const double closed[] = {mu, mu * mu + mu, std::exp(mu * (std::exp(-1.0) - 1.0))};
    for (int j = 0; j < 3; ++j) {
      if (!values[j]) continue;
      report.add(exact_row("oracle.closed_form." + functionals[j].name, "oracle_expectation", values[j]->value,
                           closed[j], cfg.oracle.tolerance, "closed_form:poisson"));
    }
  }

  {
    const JumpLaw law(model, cfg.oracle);
    double dev = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double t = H * j / 20.0;
      double sum = 0.0;
      for (int a = 0; a <= cfg.oracle.n_max; ++a) sum += law.occupancy(a, t);
      dev = std::max(dev, std::abs(sum - 1.0));
    }
    report.add(exact_row("oracle.occupancy_partition", "max_t|sum_alpha occupancy-1|", dev, 0.0,
                         law.truncation_probability() + kOccupancyRoundoff, "exact_identity:partition_of_unity"));
  }

  {
    OracleConfig doubled = cfg.oracle;
    doubled.quad_nodes *= 2;
    for (std::size_t j = 0; j < functionals.size(); ++j) {
      if (!values[j]) continue;
      const auto v2 = oracle_expectation(model, functionals[j], doubled);
      report.add(exact_row("oracle.quadrature_doubling." + functionals[j].name, "|E_q-E_2q|",
                           std::abs(values[j]->value - v2.value), 0.0, cfg.oracle.tolerance,
                           "exact_identity:quadrature_convergence"));
    }
  }

  const auto stats = path_stats(paths.size(), functionals.size(), cfg.sim.workers,
                                [&](std::size_t i, std::span<double> out) {
                                  for (std::size_t j = 0; j < functionals.size(); ++j)
                                    out[j] = functionals[j](model, paths[i]);
                                });
  for (std::size_t j = 0; j < functionals.size(); ++j) {
    if (!values[j]) continue;
    report.add(statistical_row("oracle.mc." + functionals[j].name, "mean[Y]", stats[j].mean, stats[j].std_error,
                               values[j]->value, values[j]->error_bound, cfg.tolerance.z, "oracle:expectation"));
  }
}

namespace {

// Literal evaluation of the displayed expansions of I^1, I^2, I^3.
class Expansion {
 public:
  explicit Expansion(const MeasureNodes& nodes) : nodes_(nodes) {
    for (std::size_t s = 0; s < nodes.segments.size(); ++s) {
      const auto& seg = nodes.segments[s];
      for (std::size_t j = 0; j < seg.times.size(); ++j)
        for (int x = 0; x < nodes.num_marks; ++x) {
          const double c = seg.cell(static_cast<int>(j), x, nodes.num_marks);
          if (c != 0.0) pts_.push_back({seg.times[j], x, c, static_cast<int>(s), static_cast<int>(j)});
        }
      if (seg.closed_by_atom) {
        const auto& a = nodes.atoms[seg.prior_jumps];
        pts_.push_back({a.time, a.mark, a.weight, -1, -1});
      }
    }
  }

  double eval(const IteratedFamily& fam, double tau, int k) const {
    const Bound outer = tau == kInfiniteTime ? Bound{nodes_.horizon, true, -1, -1} : Bound{tau, false, -1, -1};
    std::vector<Point> args;
    double value = fam.g0;
    if (k == 0) return value;
    for (const auto& p1 : pts_) {
      const double w1 = weight(p1, meet(cap(k), outer));
      if (w1 == 0.0) continue;
      args = {{p1.t, p1.x}};
      double inner1 = fam.terms[0](args);
      if (k >= 2) {
        for (const auto& p2 : pts_) {
          const double w2 = weight(p2, meet(cap(k - 1), open_at(p1)));
          if (w2 == 0.0) continue;
          args = {{p1.t, p1.x}, {p2.t, p2.x}};
          double inner2 = fam.terms[1](args);
          if (k >= 3) {
            for (const auto& p3 : pts_) {
              const double w3 = weight(p3, meet(cap(k - 2), open_at(p2)));
              if (w3 == 0.0) continue;
              args = {{p1.t, p1.x}, {p2.t, p2.x}, {p3.t, p3.x}};
              inner2 += w3 * fam.terms[2](args);
            }
          }
          inner1 += w2 * inner2;
        }
      }
      value += w1 * inner1;
    }
    return value;
  }

 private:
  struct Pt {
    double t;
    int x;
    double w;
    int seg;
    int node;
  };
  struct Bound {
    double t;
    bool closed;
    int seg;
    int node;
  };

  Bound cap(int j) const {
    if (j <= static_cast<int>(nodes_.atoms.size())) return {nodes_.atoms[j - 1].time, true, -1, -1};
    return {kInfiniteTime, true, -1, -1};
  }
  static Bound open_at(const Pt& p) { return {p.t, false, p.seg, p.node}; }
  static Bound meet(const Bound& closed_cap, const Bound& open) { return open.t <= closed_cap.t ? open : closed_cap; }

  double weight(const Pt& p, const Bound& b) const {
    if (p.seg < 0) return (p.t < b.t || (b.closed && p.t == b.t)) ? p.w : 0.0;
    const auto& seg = nodes_.segments[p.seg];
    if (seg.end <= b.t) return p.w;
    if (seg.start >= b.t) return 0.0;
    if (b.seg == p.seg) return nodes_.rule->partial(b.node, p.node) * p.w;
    return nodes_.rule->partial_at(seg.to_reference(b.t))[p.node] * p.w;
  }

  const MeasureNodes& nodes_;
  std::vector<Pt> pts_;
};

IteratedFamily separable_family() {
  IteratedFamily fam;
  fam.g0 = 0.3;
  fam.terms.push_back(Integrand::separable({[](double t, int x) { return 1.0 + 0.5 * t + 0.25 * x; }}));
  fam.terms.push_back(Integrand::separable(
      {[](double t, int x) { return std::cos(t) * (1.0 + x); }, [](double t, int) { return 1.0 + t; }}));
  fam.terms.push_back(Integrand::separable({[](double t, int) { return 1.0 + t; },
                                            [](double t, int x) { return (1.0 - 0.5 * t) * (1.0 + 0.5 * x); },
                                            [](double t, int) { return 0.5 + t; }}));
  return fam;
}

IteratedFamily general_family() {
  IteratedFamily fam;
  fam.g0 = -0.2;
  fam.terms.emplace_back(1, [](std::span<const Point> a) { return std::exp(-a[0].time) + 0.1 * a[0].mark; });
  fam.terms.emplace_back(2, [](std::span<const Point> a) {
    return std::exp(-(a[0].time - a[1].time)) * (1.0 + a[0].mark * a[1].mark) + a[0].time * a[1].time;
  });
  fam.terms.emplace_back(3, [](std::span<const Point> a) {
    return std::cos(a[0].time - a[2].time) * (1.0 + 0.5 * a[1].mark) + a[1].time * a[2].time;
  });
  return fam;
}

// The family {g_{i+1}((t, x), .)} seen from a fixed outer point.
IteratedFamily shifted(const IteratedFamily& fam, Point outer) {
  IteratedFamily out;
  out.g0 = fam.terms[0](std::span<const Point>(&outer, 1));
  for (int i = 1; i < fam.depth(); ++i) {
    const Integrand g = fam.terms[i];
    out.terms.emplace_back(i, [g, outer](std::span<const Point> a) {
      std::vector<Point> args{outer};
      args.insert(args.end(), a.begin(), a.end());
      return g(args);
    });
  }
  return out;
}

FactorFn random_factor(CounterRng& rng) {
  const double a = rng.uniform() * 2.0 - 1.0;
  const double b = rng.uniform() * 2.0 - 1.0;
  const double c = rng.uniform();
  return [a, b, c](double t, int x) { return (a + b * t) * (1.0 + c * x); };
}

}  // namespace

void boundary_suite(const SuiteConfig& cfg, const Model& model, std::span<const Path> paths, Report& report) {
  const ReferenceMeasure ref(model, cfg.zeta);
  const std::size_t n = std::min(paths.size(), kIdentityPaths);
  const auto sep = separable_family();
  const auto gen = general_family();
  const double H = model.horizon();
  const double tau = 0.5 * H;

  // Columns: expansion (sep, tau finite) k=1..3, expansion (sep, tau=inf) k=1..3,
  // expansion (general, recursive) k=1..3, tau-open k=1..3, cap-closed k=1..3.
  const auto dev = path_max(n, 15, cfg.sim.workers, [&](std::size_t i, std::span<double> out) {
    const Path& path = paths[i];
    const auto nodes = measure_nodes(model, ref, path, cfg.quad, cfg.mode);
    const Expansion expansion(nodes);
    for (int k = 1; k <= 3; ++k) {
      out[k - 1] = std::abs(iterated_I(nodes, sep, tau, k) - expansion.eval(sep, tau, k));
      out[2 + k] = std::abs(iterated_I(nodes, sep, kInfiniteTime, k) - expansion.eval(sep, kInfiniteTime, k));
      out[5 + k] = std::abs(iterated_I_recursive(nodes, gen, tau, k) - expansion.eval(gen, tau, k));
    }

    // A jump placed exactly at tau is invisible to the open tau cap.
    Path before;
    before.horizon = H;
    for (const auto& j : path.events)
      if (j.time < tau) before.events.push_back(j);
    Path with = before;
    if (path.events.empty() || std::none_of(path.events.begin(), path.events.end(),
                                            [&](const Jump& j) { return j.time == tau; })) {
      const int state = model.state_after(before.events);
      int mark = 0;
      for (int x = 1; x < model.num_marks(); ++x)
        if (model.transition(state, x) > model.transition(state, mark)) mark = x;
      with.events.push_back({tau, mark});
    }
    const auto nodes_before = measure_nodes(model, ref, before, cfg.quad, cfg.mode);
    const auto nodes_with = measure_nodes(model, ref, with, cfg.quad, cfg.mode);
    for (int k = 1; k <= 3; ++k) {
      out[8 + k] = std::abs(iterated_I(nodes_with, sep, tau, k) - iterated_I(nodes_before, sep, tau, k));
    }

    // The T_k cap is closed: I^k_inf - I^k_{T_k} is the atom at T_k.
    for (int k = 1; k <= 3; ++k) {
      if (path.size() < k) continue;
      const auto& atom = nodes.atoms[k - 1];
      const double full = iterated_I_recursive(nodes, gen, kInfiniteTime, k);
      const double open = iterated_I_recursive(nodes, gen, atom.time, k);
      const auto inner = shifted(gen, {atom.time, atom.mark});
      const double jump = atom.weight * iterated_I_recursive(nodes, inner, atom.time, k - 1);
      out[11 + k] = std::abs(full - open - jump);
    }
  });

  const double tol = cfg.tolerance.exact;
  for (int k = 1; k <= 3; ++k) {
    const auto ks = std::to_string(k);
    report.add(exact_row("boundary.expansion.separable_tau.k" + ks, "max|sweep-displayed|", dev[k - 1], 0.0, tol,
                         "exact_identity:displayed_expansion"));
    report.add(exact_row("boundary.expansion.separable_inf.k" + ks, "max|sweep-displayed|", dev[2 + k], 0.0, tol,
                         "exact_identity:displayed_expansion"));
    report.add(exact_row("boundary.expansion.general_tau.k" + ks, "max|recursive-displayed|", dev[5 + k], 0.0, tol,
                         "exact_identity:displayed_expansion"));
    report.add(exact_row("boundary.tau_cap_open.k" + ks, "max|I(path+jump@tau)-I(path)|", dev[8 + k], 0.0, tol,
                         "exact_identity:open_tau_cap"));
    report.add(exact_row("boundary.jump_cap_closed.k" + ks, "max|I_inf-I_Tk-atom|", dev[11 + k], 0.0, tol,
                         "exact_identity:closed_jump_cap"));
  }

  // Sweep against the recursive evaluator on random separable integrands.
  const std::size_t counts[] = {std::min<std::size_t>(n, 50), std::min<std::size_t>(n, 50),
                                std::min<std::size_t>(n, 10)};
  for (int order = 1; order <= 3; ++order) {
    const auto d = path_max(counts[order - 1], 1, cfg.sim.workers, [&](std::size_t i, std::span<double> out) {
      CounterRng rng({cfg.sim.seed ^ 0x5eedULL, i * 4 + static_cast<std::size_t>(order)});
      std::vector<FactorFn> fs;
      for (int j = 0; j < order; ++j) fs.push_back(random_factor(rng));
      const auto g = Integrand::separable(fs);
      const auto nodes = measure_nodes(model, ref, paths[i], cfg.quad, cfg.mode);
      out[0] = std::abs(iterated_J(nodes, order, g) - iterated_J_recursive(nodes, order, g));
    });
    report.add(exact_row("boundary.sweep_vs_recursive.J" + std::to_string(order), "max|sweep-recursive|", d[0], 0.0,
                         tol, "exact_identity:evaluator_agreement"));
  }
}

void telescoping_suite(const SuiteConfig& cfg, const Model& model, std::span<const Path> paths, Report& report) {
  const ReferenceMeasure ref(model, cfg.zeta);
  const std::size_t n = std::min(paths.size(), kIdentityPaths * 5);
  const auto one = Integrand::deterministic([](double, int) { return 1.0; });
  const FactorFn f = [](double t, int x) { return 1.0 + t + 0.5 * x; };
  const auto fi = Integrand::deterministic(f);
  const auto f_over_psi = Integrand::predictable([&](std::span<const Jump> h, double t, int x) {
    return f(t, x) / psi_from_history(model, ref, h, t, x);
  });
  const auto f_over_sqrt_psi = Integrand::predictable([&](std::span<const Jump> h, double t, int x) {
    return f(t, x) / std::sqrt(psi_from_history(model, ref, h, t, x));
  });

  const auto dev = path_max(n, 3, cfg.sim.workers, [&](std::size_t i, std::span<double> out) {
    const Path& path = paths[i];
    const auto nodes = measure_nodes(model, ref, path, cfg.quad, cfg.mode);
    double running = 0.0;
    double prev = 0.0;
    double worst = 0.0;
    for (const auto& jump : path.events) {
      running += integrate_window(nodes, one, prev, jump.time);
      worst = std::max(worst, std::abs(integrate_window(nodes, one, 0.0, jump.time) - running));
      prev = jump.time;
    }
    running += integrate_window(nodes, one, prev, model.horizon());
    worst = std::max(worst, std::abs(integrate(nodes, one) - running));
    out[0] = worst;

    const auto none = measure_nodes(model, ref, path, cfg.quad, RescaleMode::None);
    const auto psi = measure_nodes(model, ref, path, cfg.quad, RescaleMode::Psi);
    const auto sqrt_psi = measure_nodes(model, ref, path, cfg.quad, RescaleMode::SqrtPsi);
    const double base = integrate(none, fi);
    out[1] = std::abs(base - integrate(psi, f_over_psi));
    out[2] = std::abs(base - integrate(sqrt_psi, f_over_sqrt_psi));
  });
  const double tol = cfg.tolerance.exact;
  report.add(exact_row("telescoping.martingale_increments", "max|M_Ta-sum increments|", dev[0], 0.0, tol,
                       "exact_identity:telescoping"));
  report.add(exact_row("telescoping.rescale_equivalence.psi", "max|int f dq-int f/psi dq_psi|", dev[1], 0.0, tol,
                       "exact_identity:rescale_equivalence"));
  report.add(exact_row("telescoping.rescale_equivalence.sqrt_psi", "max|int f dq-int f/sqrt(psi) dm|", dev[2], 0.0,
                       tol, "exact_identity:rescale_equivalence"));
}

Report run_suites(const SuiteConfig& cfg, const Model& model, std::span<const Path> paths) {
  Report report;
  std::size_t jumps = 0;
  for (const auto& p : paths) jumps += p.events.size();
  const std::size_t nodes_per_path_segment = static_cast<std::size_t>(cfg.quad.nodes) * model.num_marks();
  const std::size_t node_count = jumps + (jumps + paths.size()) * nodes_per_path_segment;
  report.stamp = {{"config", cfg.name},
                  {"seed", std::to_string(cfg.sim.seed)},
                  {"paths", std::to_string(paths.size())},
                  {"total_jumps", std::to_string(jumps)},
                  {"quad_nodes", std::to_string(cfg.quad.nodes)},
                  {"node_count", std::to_string(node_count)},
                  {"mode", to_string(cfg.mode)},
                  {"oracle_n_max", std::to_string(cfg.oracle.n_max)},
                  {"oracle_quad_nodes", std::to_string(cfg.oracle.quad_nodes)},
                  {"z_threshold", format_number(cfg.tolerance.z)},
                  {"exact_tolerance", format_number(cfg.tolerance.exact)}};
  for (const auto& suite : cfg.suites) {
    if (suite == "martingale") martingale_suite(cfg, model, paths, report);
    else if (suite == "isometry") isometry_suite(cfg, model, paths, report);
    else if (suite == "orthogonality") orthogonality_suite(cfg, model, paths, report);
    else if (suite == "completeness") completeness_suite(cfg, model, paths, report);
    else if (suite == "oracle-check") oracle_suite(cfg, model, paths, report);
    else if (suite == "boundary") boundary_suite(cfg, model, paths, report);
    else if (suite == "telescoping") telescoping_suite(cfg, model, paths, report);
    else throw Error(ErrorCode::ConfigError, "unknown suite '" + suite + "'");
  }
  return report;
}

Report run(const SuiteConfig& cfg) {
  const Model model = validate_model(cfg.model, cfg.zeta);
  const auto paths = sample_paths(model, cfg.sim.seed, cfg.sim.paths, cfg.sim.workers, cfg.sim.jump_cap);
  return run_suites(cfg, model, paths);
}

CompletenessResult projection_table(const SuiteConfig& cfg) {
  const Model model = validate_model(cfg.model, cfg.zeta);
  const auto paths = sample_paths(model, cfg.sim.seed, cfg.sim.paths, cfg.sim.workers, cfg.sim.jump_cap);
  std::vector<Functional> functionals;
  for (const auto& name : cfg.chaos.functionals) functionals.push_back(functional_by_name(name, model.horizon()));
  CompletenessOptions opt;
  opt.max_order = cfg.chaos.max_order;
  opt.time_degree = cfg.chaos.time_degree;
  opt.ridge = cfg.chaos.ridge;
  opt.quad = cfg.quad;
  opt.mode = cfg.mode;
  opt.workers = cfg.sim.workers;
  opt.oracle = cfg.oracle;
  opt.z = cfg.tolerance.z;
  opt.thresholds = cfg.chaos.thresholds;
  return completeness_report(model, cfg.zeta, paths, functionals, opt);
}

Report oracle_table(const SuiteConfig& cfg) {
  const Model model = validate_model(cfg.model, cfg.zeta);
  const double H = model.horizon();
  Report report;
  report.stamp = {{"config", cfg.name},
                  {"oracle_n_max", std::to_string(cfg.oracle.n_max)},
                  {"oracle_quad_nodes", std::to_string(cfg.oracle.quad_nodes)}};
  std::vector<Functional> functionals = {count_functional(), count_squared_functional(), exp_neg_count_functional(),
                                         first_jump_functional(H)};
  for (const auto& name : cfg.chaos.functionals) {
    auto f = functional_by_name(name, H);
    if (std::none_of(functionals.begin(), functionals.end(), [&](const Functional& g) { return g.name == f.name; }))
      functionals.push_back(f);
  }
  for (const auto& f : functionals) {
    const auto v = oracle_expectation(model, f, cfg.oracle);
    report.add(info_row("oracle.expectation." + f.name, "E[Y]", v.value, v.error_bound,
                        std::numeric_limits<double>::quiet_NaN(), "oracle:expectation"));
  }
  const JumpLaw law(model, cfg.oracle);
  for (int a = 0; a <= std::min(cfg.oracle.n_max, 10); ++a) {
    report.add(info_row("oracle.occupancy.alpha" + std::to_string(a), "P(N_H=alpha)", law.occupancy(a, H),
                        law.truncation_probability(), std::numeric_limits<double>::quiet_NaN(), "oracle:occupancy"));
  }
  const auto basis = build_basis(cfg.chaos.max_order, cfg.chaos.time_degree, model.num_marks(), H);
  for (const auto& f : functionals) {
    try {
      const auto tail = chaos_tail(model, cfg.zeta, f, basis, cfg.mode, cfg.oracle);
      for (std::size_t m = 0; m < tail.residual_fraction.size(); ++m) {
        report.add(info_row("oracle.chaos_tail." + f.name + ".r" + std::to_string(m), "residual_fraction",
                            tail.residual_fraction[m], tail.error_bound, std::numeric_limits<double>::quiet_NaN(),
                            "oracle:chaos_tail"));
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unsupported) throw;
    }
  }
  return report;
}

void write_outputs(const SuiteConfig& cfg, const Report& report) {
  if (!cfg.output.csv.empty()) {
    std::ofstream out(cfg.output.csv);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + cfg.output.csv + "'");
    write_report_csv(out, report);
  }
  if (!cfg.output.json.empty()) {
    std::ofstream out(cfg.output.json);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + cfg.output.json + "'");
    write_report_json(out, report);
  }
}

}  // namespace mppchaos
