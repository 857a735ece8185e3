#include "mppchaos/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "mppchaos/error.hpp"

namespace mppchaos {

namespace {

double poisson_pmf(double mean, int n) {
  if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

void check_config(const OracleConfig& cfg) {
  if (cfg.n_max < 0) throw Error(ErrorCode::InvalidArgument, "oracle n_max must be nonnegative");
  if (cfg.quad_nodes < 2) throw Error(ErrorCode::GridTooCoarse, "oracle needs at least 2 quadrature nodes");
  if (cfg.ode_steps < 1) throw Error(ErrorCode::InvalidArgument, "oracle ode_steps must be positive");
  if (!(cfg.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "oracle tolerance must be positive");
}

std::vector<std::vector<double>> state_transitions(const Model& model) {
  const int S = model.num_states();
  std::vector<std::vector<double>> trans(S, std::vector<double>(S, 0.0));
  for (int s = 0; s < S; ++s)
    for (int x = 0; x < model.num_marks(); ++x) {
      const double k = model.transition(s, x);
      if (k > 0.0) trans[s][model.next_state(s, x)] += k;
    }
  return trans;
}

}  // namespace

JumpLaw::JumpLaw(const Model& model, OracleConfig cfg)
    : model_(&model), cfg_(cfg), grid_((check_config(cfg), cfg.quad_nodes), 0.0, model.horizon()),
      rule_(GaussLegendre::get(cfg.quad_nodes)) {
  if (poisson_closed_form() || cfg_.n_max == 0) return;
  const int S = model.num_states();
  const int p = grid_.size();
  const auto trans = state_transitions(model);
  const auto& gl = *rule_;
  const int s0 = model.initial_state();

  std::vector<double> first(static_cast<std::size_t>(S) * p, 0.0);
  for (int k = 0; k < p; ++k) {
    const double t = grid_.points()[k];
    const double f = model.state_hazard(s0, t) * std::exp(-model.state_integrated_hazard(s0, t));
    for (int s = 0; s < S; ++s) first[static_cast<std::size_t>(s) * p + k] = f * trans[s0][s];
  }
  phi_.push_back(std::move(first));
  if (cfg_.n_max == 1) return;

  // conv[s](k, j): weight of phi_n(t_j, s) in int_0^{t_k} phi_n(u, s) h_s(t_k - u) S_s(t_k - u) du.
  std::vector<Eigen::MatrixXd> conv(S, Eigen::MatrixXd::Zero(p, p));
  std::vector<double> coef(p);
  for (int k = 0; k < p; ++k) {
    const double t = grid_.points()[k];
    if (t <= 0.0) continue;
    const double half = 0.5 * t;
    for (int i = 0; i < gl.size(); ++i) {
      const double u = half * (1.0 + gl.nodes()[i]);
      grid_.coefficients(u, coef);
      for (int s = 0; s < S; ++s) {
        const double e = t - u;
        const double ker = gl.weights()[i] * half * model.state_hazard(s, e) *
                           std::exp(-model.state_integrated_hazard(s, e));
        for (int j = 0; j < p; ++j) conv[s](k, j) += ker * coef[j];
      }
    }
  }
  for (int n = 2; n <= cfg_.n_max; ++n) {
    const auto& prev = phi_.back();
    std::vector<double> next(static_cast<std::size_t>(S) * p, 0.0);
    for (int s = 0; s < S; ++s) {
      const Eigen::Map<const Eigen::VectorXd> in(prev.data() + static_cast<std::size_t>(s) * p, p);
      const Eigen::VectorXd moved = conv[s] * in;
      for (int s2 = 0; s2 < S; ++s2) {
        if (trans[s][s2] == 0.0) continue;
        for (int k = 0; k < p; ++k) next[static_cast<std::size_t>(s2) * p + k] += trans[s][s2] * moved(k);
      }
    }
    phi_.push_back(std::move(next));
  }
}

bool JumpLaw::poisson_closed_form() const {
  return cfg_.closed_form && std::holds_alternative<MarkedPoisson>(model_->spec().kind);
}

double JumpLaw::poisson_rate() const { return std::get<MarkedPoisson>(model_->spec().kind).rate; }

double JumpLaw::jump_density(int n, int state, double t) const {
  if (n < 1 || n > cfg_.n_max) throw Error(ErrorCode::InvalidArgument, "jump index outside [1, n_max]");
  if (poisson_closed_form()) {
    if (state != 0) return 0.0;
    const double lambda = poisson_rate();
    if (t <= 0.0) return n == 1 ? lambda : 0.0;
    return std::exp(n * std::log(lambda) + (n - 1) * std::log(t) - lambda * t - std::lgamma(static_cast<double>(n)));
  }
  const int p = grid_.size();
  return grid_.interpolate({phi_[n - 1].data() + static_cast<std::size_t>(state) * p, static_cast<std::size_t>(p)}, t);
}

double JumpLaw::occupancy(int n, int state, double t) const {
  return occupancy_weighted(n, state, t, {});
}

double JumpLaw::occupancy(int n, double t) const {
  if (poisson_closed_form()) return poisson_pmf(poisson_rate() * t, n);
  double sum = 0.0;
  for (int s = 0; s < model_->num_states(); ++s) sum += occupancy(n, s, t);
  return sum;
}

double JumpLaw::occupancy_weighted(int n, int state, double t,
                                   const std::function<double(double)>& elapsed_weight) const {
  if (n < 0 || n > cfg_.n_max) throw Error(ErrorCode::InvalidArgument, "jump count outside [0, n_max]");
  const auto weight = [&](double e) { return elapsed_weight ? elapsed_weight(e) : 1.0; };
  if (n == 0) {
    if (state != model_->initial_state()) return 0.0;
    return std::exp(-model_->state_integrated_hazard(state, t)) * weight(t);
  }
  if (t <= 0.0) return 0.0;
  if (poisson_closed_form() && !elapsed_weight) return state == 0 ? poisson_pmf(poisson_rate() * t, n) : 0.0;
  const auto& gl = *rule_;
  const double half = 0.5 * t;
  double sum = 0.0;
  for (int i = 0; i < gl.size(); ++i) {
    const double u = half * (1.0 + gl.nodes()[i]);
    const double e = t - u;
    sum += gl.weights()[i] * jump_density(n, state, u) * std::exp(-model_->state_integrated_hazard(state, e)) *
           weight(e);
  }
  return sum * half;
}

double JumpLaw::tail_bound(const std::function<double(int)>& growth) const {
  const double mean = model_->hazard_bound() * model_->horizon();
  if (mean <= 0.0) return 0.0;
  double sum = 0.0;
  for (int n = cfg_.n_max + 1; n < cfg_.n_max + 5000; ++n) {
    const double term = growth(n) * poisson_pmf(mean, n);
    sum += term;
    if (n > mean && term <= 1e-30 * std::max(sum, 1e-300)) break;
  }
  return sum;
}

double JumpLaw::truncation_probability() const {
  return tail_bound([](int) { return 1.0; });
}

double occupancy_probability(const Model& model, int alpha, double t, OracleConfig cfg) {
  if (!(t > 0.0) || t > model.horizon()) {
    throw Error(ErrorCode::OutOfHorizon, "occupancy time outside (0, H]");
  }
  if (alpha < 0) throw Error(ErrorCode::InvalidArgument, "negative jump count");
  if (alpha > cfg.n_max) cfg.n_max = alpha;
  return JumpLaw(model, cfg).occupancy(alpha, t);
}

OracleValue oracle_expectation(const Model& model, const Functional& functional, OracleConfig cfg) {
  if (!functional.terminal) {
    throw Error(ErrorCode::Unsupported, "functional '" + functional.name + "' has no oracle form");
  }
  const JumpLaw law(model, cfg);
  const double bound = law.tail_bound(functional.growth ? functional.growth : [](int) { return 1.0; });
  if (bound > cfg.tolerance) {
    std::ostringstream os;
    os << "truncation bound " << bound << " exceeds tolerance " << cfg.tolerance << " at n_max = " << cfg.n_max;
    throw Error(ErrorCode::TruncationTooLarge, os.str());
  }
  const double H = model.horizon();
  double value = 0.0;
  for (int n = 0; n <= cfg.n_max; ++n)
    for (int s = 0; s < model.num_states(); ++s) {
      const double prob = law.occupancy(n, s, H);
      if (prob != 0.0) value += prob * functional.terminal(n, s);
    }
  if (functional.first && cfg.n_max >= 1) {
    const auto& gl = *GaussLegendre::get(cfg.quad_nodes);
    value += gl.integrate(
        [&](double u) {
          double d = 0.0;
          for (int s = 0; s < model.num_states(); ++s) d += law.jump_density(1, s, u);
          return d * functional.first(u);
        },
        0.0, H);
  }
  return {value, bound};
}

namespace {

// sum_alpha int_0^H sum_x nu_{alpha+1}(x) w(t) mark_term(t, x) E_alpha(t, x) dt, where
// E_alpha = P(N_t = alpha) or, with psi_power = 1, E[1{N_t = alpha} psi(t, x)].
OracleValue zeta_sum(const Model& model, const ZetaSpec& zeta, const OracleConfig& cfg,
                     const std::function<double(double, int)>& mark_term, int psi_power) {
  const JumpLaw law(model, cfg);
  const ReferenceMeasure ref(model, zeta);
  const auto& gl = *GaussLegendre::get(cfg.quad_nodes);
  const double H = model.horizon();
  const double half = 0.5 * H;
  const int m = model.num_marks();
  double value = 0.0;
  double sup = 0.0;
  for (int i = 0; i < gl.size(); ++i) {
    const double t = half * (1.0 + gl.nodes()[i]);
    const double w = ref.time_weight(t);
    const double qw = gl.weights()[i] * half;
    for (int alpha = 0; alpha <= cfg.n_max; ++alpha) {
      const auto& nu = ref.marks(alpha + 1);
      double occ = -1.0;
      for (int x = 0; x < m; ++x) {
        if (nu[x] == 0.0) continue;
        const double term = mark_term(t, x);
        if (term == 0.0) continue;
        double expect = 0.0;
        if (psi_power == 0) {
          if (occ < 0.0) occ = law.occupancy(alpha, t);
          expect = occ;
          sup = std::max(sup, std::abs(term) * w * nu[x]);
        } else {
          for (int s = 0; s < model.num_states(); ++s) {
            const double k = model.transition(s, x);
            if (k <= 0.0) continue;
            const double scale = w * nu[x] / k;
            expect += scale * law.occupancy_weighted(alpha, s, t, [&](double e) { return 1.0 / model.state_hazard(s, e); });
            const double hmin = std::min(model.state_hazard(s, 0.0), model.state_hazard(s, H));
            sup = std::max(sup, std::abs(term) * w * nu[x] * scale / hmin);
          }
        }
        value += qw * w * nu[x] * term * expect;
      }
    }
  }
  return {value, law.truncation_probability() * sup * H};
}

}  // namespace

OracleValue zeta_inner_product(const FactorFn& f, const FactorFn& g, const Model& model, const ZetaSpec& zeta,
                               OracleConfig cfg) {
  return zeta_sum(model, zeta, cfg, [&](double t, int x) { return f(t, x) * g(t, x); }, 0);
}

OracleValue psi_weighted_inner_product(const FactorFn& f, const FactorFn& g, const Model& model,
                                       const ZetaSpec& zeta, OracleConfig cfg) {
  return zeta_sum(model, zeta, cfg, [&](double t, int x) { return f(t, x) * g(t, x); }, 1);
}

OracleValue zeta_integral(const FactorFn& f, const Model& model, const ZetaSpec& zeta, OracleConfig cfg) {
  return zeta_sum(model, zeta, cfg, f, 0);
}

namespace {

double rescale_of(RescaleMode mode, double psi) {
  switch (mode) {
    case RescaleMode::SqrtPsi: return std::sqrt(psi);
    case RescaleMode::Psi: return psi;
    case RescaleMode::None: return 1.0;
  }
  return 1.0;
}

// Tuples over the active factors, orders 0..K, flattened order by order.
struct TupleIndex {
  int r = 0;
  std::vector<int> outer;   // outermost factor (active index), -1 for the empty tuple
  std::vector<int> parent;  // flattened index of the suffix, -1 for the empty tuple
  std::vector<int> order;
};

TupleIndex make_tuples(int r, int K) {
  TupleIndex ti;
  ti.r = r;
  ti.outer.push_back(-1);
  ti.parent.push_back(-1);
  ti.order.push_back(0);
  int prev_offset = 0;
  int width = 1;
  for (int n = 1; n <= K; ++n) {
    const int offset = static_cast<int>(ti.outer.size());
    for (int idx = 0; idx < width * r; ++idx) {
      ti.outer.push_back(idx / width);
      ti.parent.push_back(prev_offset + idx % width);
      ti.order.push_back(n);
    }
    prev_offset = offset;
    width *= r;
  }
  return ti;
}

}  // namespace

ChaosTail chaos_tail(const Model& model, const ZetaSpec& zeta, const Functional& functional,
                     const ChaosBasis& basis, RescaleMode mode, OracleConfig cfg) {
  check_config(cfg);
  if (!model.is_markov()) {
    throw Error(ErrorCode::Unsupported, "exact chaos tails need a hazard that is constant per state");
  }
  if (!functional.terminal || functional.first) {
    throw Error(ErrorCode::Unsupported, "exact chaos tails need a functional of (N_H, X_H)");
  }
  if (basis.num_marks() != model.num_marks() || basis.horizon() != model.horizon()) {
    throw Error(ErrorCode::DimensionMismatch, "basis does not match the model's marks or horizon");
  }
  const JumpLaw law(model, cfg);
  const double trunc = law.tail_bound([&](int n) {
    const double g = functional.growth ? functional.growth(n) : 1.0;
    return g * g;
  });

  const int S = model.num_states();
  const int M = model.num_marks();
  const int K = basis.max_order();
  const double H = model.horizon();
  const ReferenceMeasure ref(model, zeta);

  ChaosTail out;
  std::vector<int> active;
  for (int f = 0; f < static_cast<int>(basis.factors().size()); ++f) {
    bool used = false;
    for (int s = 0; s < S; ++s) used = used || model.transition(s, basis.factors()[f].mark) > 0.0;
    if (used) {
      active.push_back(f);
    } else {
      out.pruned_factors.push_back(f);
    }
  }
  const TupleIndex ti = make_tuples(static_cast<int>(active.size()), K);
  const int T = static_cast<int>(ti.outer.size());
  const int layers = cfg.n_max + 1;
  const std::size_t block = static_cast<std::size_t>(T) * T;
  const std::size_t dim = block * S * layers;
  auto at = [&](int n, int s) { return (static_cast<std::size_t>(n) * S + s) * block; };

  std::vector<double> hazard(S);
  for (int s = 0; s < S; ++s) hazard[s] = model.state_hazard(s, 0.0);

  // Per time: drift coefficient D[n][s][a] and jump coefficient A[n][s][x][a]
  // for active factor a (A for a jump into count n from state s with mark x).
  const int r = ti.r;
  std::vector<double> D(static_cast<std::size_t>(layers) * S * r);
  std::vector<double> A(static_cast<std::size_t>(layers) * S * M * r);
  auto coefficients = [&](double t) {
    const double w = ref.time_weight(t);
    std::vector<double> poly(r);
    for (int a = 0; a < r; ++a) poly[a] = shifted_legendre(basis.factors()[active[a]].degree, t, H);
    for (int n = 0; n < layers; ++n) {
      const auto& nu_wait = ref.marks(n + 1);
      const auto& nu_jump = ref.marks(std::max(n, 1));
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < r; ++a) {
          const int x = basis.factors()[active[a]].mark;
          const double rho = hazard[s] * model.transition(s, x);
          double d = 0.0;
          if (rho > 0.0) d = poly[a] * rescale_of(mode, w * nu_wait[x] / rho) * rho;
          D[(static_cast<std::size_t>(n) * S + s) * r + a] = d;
          for (int y = 0; y < M; ++y) {
            double c = 0.0;
            if (y == x && rho > 0.0 && n >= 1) c = poly[a] * rescale_of(mode, w * nu_jump[x] / rho);
            A[((static_cast<std::size_t>(n) * S + s) * M + y) * r + a] = c;
          }
        }
      }
    }
  };

  auto rhs = [&](double t, const std::vector<double>& q, std::vector<double>& dq) {
    coefficients(t);
    std::fill(dq.begin(), dq.end(), 0.0);
    for (int n = 0; n < layers; ++n)
      for (int s2 = 0; s2 < S; ++s2) {
        const double* Q = q.data() + at(n, s2);
        double* out_q = dq.data() + at(n, s2);
        const double* d = D.data() + (static_cast<std::size_t>(n) * S + s2) * r;
        for (int u = 0; u < T; ++u)
          for (int v = 0; v < T; ++v) {
            double val = -hazard[s2] * Q[u * T + v];
            if (ti.outer[u] >= 0) val -= d[ti.outer[u]] * Q[ti.parent[u] * T + v];
            if (ti.outer[v] >= 0) val -= d[ti.outer[v]] * Q[u * T + ti.parent[v]];
            out_q[u * T + v] = val;
          }
        if (n == 0) continue;
        for (int s = 0; s < S; ++s)
          for (int x = 0; x < M; ++x) {
            const double k = model.transition(s, x);
            if (k <= 0.0 || model.next_state(s, x) != s2) continue;
            const double rho = hazard[s] * k;
            const double* P = q.data() + at(n - 1, s);
            const double* a = A.data() + ((static_cast<std::size_t>(n) * S + s) * M + x) * r;
            for (int u = 0; u < T; ++u) {
              const double au = ti.outer[u] >= 0 ? a[ti.outer[u]] : 0.0;
              const int pu = ti.parent[u];
              for (int v = 0; v < T; ++v) {
                const double av = ti.outer[v] >= 0 ? a[ti.outer[v]] : 0.0;
                const int pv = ti.parent[v];
                double val = P[u * T + v];
                if (av != 0.0) val += av * P[u * T + pv];
                if (au != 0.0) val += au * P[pu * T + v];
                if (au != 0.0 && av != 0.0) val += au * av * P[pu * T + pv];
                out_q[u * T + v] += rho * val;
              }
            }
          }
      }
  };

  std::vector<double> q(dim, 0.0), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  q[at(0, model.initial_state())] = 1.0;
  const double h = H / cfg.ode_steps;
  for (int step = 0; step < cfg.ode_steps; ++step) {
    const double t = step * h;
    rhs(t, q, k1);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = q[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = q[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = q[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < dim; ++i) q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(T, T);
  Eigen::VectorXd cross = Eigen::VectorXd::Zero(T);
  double ey = 0.0, ey2 = 0.0;
  for (int n = 0; n < layers; ++n)
    for (int s = 0; s < S; ++s) {
      const double* Q = q.data() + at(n, s);
      const double y = functional.terminal(n, s);
      for (int u = 0; u < T; ++u) {
        cross(u) += y * Q[u];
        for (int v = 0; v < T; ++v) gram(u, v) += Q[u * T + v];
      }
      ey += y * Q[0];
      ey2 += y * y * Q[0];
    }
  gram = 0.5 * (gram + gram.transpose());
  out.mean = ey;
  out.variance = ey2 - ey * ey;
  out.error_bound = out.variance > 0.0 ? trunc / out.variance : trunc;

  for (int m = 0; m <= K; ++m) {
    if (out.variance <= 1e-14 * std::max(ey2, 1e-300)) {
      out.residual_fraction.push_back(0.0);
      continue;
    }
    int p = 0;
    while (p < T && ti.order[p] <= m) ++p;
    const Eigen::MatrixXd g = gram.topLeftCorner(p, p);
    const Eigen::VectorXd b = cross.head(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    const double cutoff = 1e-13 * std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::VectorXd proj = eig.eigenvectors().transpose() * b;
    double explained = 0.0;
    for (int i = 0; i < p; ++i) {
      const double lambda = eig.eigenvalues()(i);
      if (lambda > cutoff) explained += proj(i) * proj(i) / lambda;
    }
    out.residual_fraction.push_back(std::max(ey2 - explained, 0.0) / out.variance);
  }
  return out;
}

}  // namespace mppchaos
