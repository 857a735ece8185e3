#include "mppchaos/chaos.hpp"

#include <cmath>
#include <limits>

#include "mppchaos/error.hpp"
#include "mppchaos/parallel.hpp"
#include "mppchaos/quadrature.hpp"

namespace mppchaos {

std::size_t ChaosBasis::count(int order) const {
  std::size_t c = 1;
  for (int i = 0; i < order; ++i) c *= factors_.size();
  return c;
}

std::size_t ChaosBasis::total() const { return offset(max_order_ + 1); }

std::size_t ChaosBasis::offset(int order) const {
  std::size_t o = 0;
  for (int n = 0; n < order; ++n) o += count(n);
  return o;
}

std::vector<int> ChaosBasis::tuple(int order, std::size_t index) const {
  std::vector<int> out(order);
  const std::size_t r = factors_.size();
  for (int i = order - 1; i >= 0; --i) {
    out[i] = static_cast<int>(index % r);
    index /= r;
  }
  return out;
}

double ChaosBasis::factor_value(int factor, double t, int mark) const {
  const auto& f = factors_[factor];
  if (mark != f.mark) return 0.0;
  return shifted_legendre(f.degree, t, horizon_);
}

std::vector<FactorFn> ChaosBasis::factor_functions() const {
  std::vector<FactorFn> out;
  out.reserve(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const BasisFactor f = factors_[i];
    const double h = horizon_;
    out.push_back([f, h](double t, int x) { return x == f.mark ? shifted_legendre(f.degree, t, h) : 0.0; });
  }
  return out;
}

Integrand ChaosBasis::element(int order, std::size_t index) const {
  if (order == 0) return Integrand::constant(1.0, 0);
  const auto all = factor_functions();
  std::vector<FactorFn> chosen;
  for (int f : tuple(order, index)) chosen.push_back(all[f]);
  return Integrand::separable(std::move(chosen));
}

ChaosBasis build_basis(int max_order, int time_degree, int num_marks, double horizon) {
  if (max_order < 0 || max_order > kMaxChaosOrder) {
    throw Error(ErrorCode::InvalidArgument, "chaos order must be in [0, " + std::to_string(kMaxChaosOrder) + "]");
  }
  if (time_degree < 0 || time_degree > kMaxTimeDegree) {
    throw Error(ErrorCode::InvalidArgument, "time degree must be in [0, " + std::to_string(kMaxTimeDegree) + "]");
  }
  if (num_marks < 1) throw Error(ErrorCode::InvalidArgument, "empty mark space");
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  ChaosBasis b;
  b.max_order_ = max_order;
  b.time_degree_ = time_degree;
  b.num_marks_ = num_marks;
  b.horizon_ = horizon;
  for (int d = 0; d <= time_degree; ++d)
    for (int x = 0; x < num_marks; ++x) b.factors_.push_back({d, x});
  for (int n = 1; n <= max_order; ++n) {
    const double c = std::pow(static_cast<double>(b.factors_.size()), n);
    if (c > static_cast<double>(kMaxBasisPerOrder)) {
      throw Error(ErrorCode::SizeCap, "order " + std::to_string(n) + " would have " +
                                          std::to_string(static_cast<long long>(c)) + " basis elements (cap " +
                                          std::to_string(kMaxBasisPerOrder) + ")");
    }
  }
  return b;
}

std::vector<double> feature_row(const MeasureNodes& nodes, const ChaosBasis& basis) {
  const auto factors = basis.factor_functions();
  const auto acc = tuple_integrals(nodes, factors, basis.max_order());
  std::vector<double> row;
  row.reserve(basis.total());
  for (const auto& order : acc) row.insert(row.end(), order.begin(), order.end());
  return row;
}

Eigen::MatrixXd evaluate_features(const Model& model, const ReferenceMeasure& reference,
                                  std::span<const Path> paths, const ChaosBasis& basis, QuadSpec quad,
                                  RescaleMode mode, int workers) {
  const auto n = static_cast<Eigen::Index>(paths.size());
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(basis.total()));
  const auto factors = basis.factor_functions();
  parallel_for(paths.size(), workers, [&](std::size_t i) {
    const auto nodes = measure_nodes(model, reference, paths[i], quad, mode);
    const auto acc = tuple_integrals(nodes, factors, basis.max_order());
    Eigen::Index col = 0;
    for (const auto& order : acc)
      for (double v : order) out(static_cast<Eigen::Index>(i), col++) = v;
  });
  return out;
}

namespace {

struct Fit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
};

Fit fit_columns(std::span<const double> y, const Eigen::MatrixXd& features, const std::vector<Eigen::Index>& cols,
                const Eigen::MatrixXd& gram, const Eigen::VectorXd& cross, double ridge) {
  const auto n = features.rows();
  const auto p = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd sub(n, p);
  for (Eigen::Index j = 0; j < p; ++j) sub.col(j) = features.col(cols[j]);
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), n);
  Fit fit;
  if (ridge > 0.0) {
    Eigen::MatrixXd g(p, p);
    Eigen::VectorXd b(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      b(i) = cross(cols[i]);
      for (Eigen::Index j = 0; j < p; ++j) g(i, j) = gram(cols[i], cols[j]);
    }
    const double shift = ridge * g.trace() / static_cast<double>(p);
    g.diagonal().array() += shift;
    fit.coefficients = g.ldlt().solve(b);
  } else {
    fit.coefficients = sub.completeOrthogonalDecomposition().solve(target);
  }
  fit.residuals = target - sub * fit.coefficients;
  return fit;
}

}  // namespace

ProjectionResult project(std::span<const double> y, const Eigen::MatrixXd& features, const ChaosBasis& basis,
                         double ridge) {
  const auto n = features.rows();
  if (static_cast<Eigen::Index>(y.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "target has " + std::to_string(y.size()) + " values for " +
                                                  std::to_string(n) + " feature rows");
  }
  if (features.cols() != static_cast<Eigen::Index>(basis.total())) {
    throw Error(ErrorCode::DimensionMismatch, "feature matrix has " + std::to_string(features.cols()) +
                                                  " columns, basis has " + std::to_string(basis.total()));
  }
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "projection needs at least 2 paths");
  if (ridge < 0.0) throw Error(ErrorCode::InvalidArgument, "ridge must be nonnegative");

  ProjectionResult out;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    if (features.col(j).cwiseAbs().maxCoeff() == 0.0) {
      out.dropped_columns.push_back(static_cast<std::size_t>(j));
    } else {
      kept.push_back(j);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), n);
  const Eigen::MatrixXd gram = (features.transpose() * features) * inv_n;
  const Eigen::VectorXd cross = (features.transpose() * target) * inv_n;

  {
    Eigen::MatrixXd g(kept.size(), kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = 0; j < kept.size(); ++j) g(i, j) = gram(kept[i], kept[j]);
    if (kept.empty()) {
      out.condition_number = 1.0;
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues().minCoeff();
      const double hi = eig.eigenvalues().maxCoeff();
      out.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
  }

  const double mean = target.mean();
  const Eigen::ArrayXd centred2 = (target.array() - mean).square();
  // Spread at rounding level (a constant target) counts as zero variance.
  const double spread_floor = 64.0 * std::numeric_limits<double>::epsilon() * target.cwiseAbs().maxCoeff();
  const double sst = centred2.maxCoeff() <= spread_floor * spread_floor ? 0.0 : centred2.sum();
  out.target_variance = sst / static_cast<double>(n - 1);

  const int K = basis.max_order();
  for (int m = 0; m <= K; ++m) {
    const auto limit = static_cast<Eigen::Index>(basis.offset(m + 1));
    std::vector<Eigen::Index> cols;
    for (auto j : kept)
      if (j < limit) cols.push_back(j);
    Fit fit;
    if (cols.empty()) {
      fit.coefficients = Eigen::VectorXd();
      fit.residuals = target;
    } else {
      fit = fit_columns(y, features, cols, gram, cross, ridge);
    }
    if (sst == 0.0) {
      out.residual_fraction.push_back(0.0);
      out.std_error.push_back(0.0);
    } else {
      const auto p = static_cast<double>(cols.size());
      const double dof = static_cast<double>(n) > p ? static_cast<double>(n) - p : static_cast<double>(n);
      const double c1 = static_cast<double>(n) / dof;
      const double c2 = static_cast<double>(n) / static_cast<double>(n - 1);
      const Eigen::ArrayXd e2 = fit.residuals.array().square();
      const double a = e2.mean() * c1;
      const double b = centred2.mean() * c2;
      const double r = a / b;
      const Eigen::ArrayXd infl = (e2 * c1 - r * centred2 * c2) / b;
      const double var = (infl - infl.mean()).square().sum() / static_cast<double>(n - 1);
      out.residual_fraction.push_back(std::max(r, 0.0));
      out.std_error.push_back(std::sqrt(var * inv_n));
    }
    if (m == K) {
      out.coefficients.assign(K + 1, {});
      for (int o = 0; o <= K; ++o) out.coefficients[o].assign(basis.count(o), 0.0);
      for (std::size_t i = 0; i < cols.size(); ++i) {
        const auto col = static_cast<std::size_t>(cols[i]);
        int o = 0;
        while (basis.offset(o + 1) <= col) ++o;
        out.coefficients[o][col - basis.offset(o)] = fit.coefficients(static_cast<Eigen::Index>(i));
      }
    }
  }
  return out;
}

}  // namespace mppchaos
