#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "mppchaos/integral.hpp"
#include "mppchaos/martingale.hpp"

namespace mppchaos {

// Time polynomial times a mark indicator: P_degree(2t/H - 1) * 1{x = mark}.
struct BasisFactor {
  int degree = 0;
  int mark = 0;
};

inline constexpr int kMaxChaosOrder = 4;
inline constexpr int kMaxTimeDegree = 6;
inline constexpr std::size_t kMaxBasisPerOrder = 10000;

// Separable chaos basis. Order-n elements are all n-tuples of factors,
// outer-first, with tuple index read as base-|factors| digits (first factor
// most significant). Columns are laid out order by order, order 0 first.
class ChaosBasis {
 public:
  int max_order() const { return max_order_; }
  int time_degree() const { return time_degree_; }
  int num_marks() const { return num_marks_; }
  double horizon() const { return horizon_; }
  const std::vector<BasisFactor>& factors() const { return factors_; }

  std::size_t count(int order) const;
  std::size_t total() const;
  std::size_t offset(int order) const;
  // Outer-first factor indices of element `index` of the given order.
  std::vector<int> tuple(int order, std::size_t index) const;

  double factor_value(int factor, double t, int mark) const;
  std::vector<FactorFn> factor_functions() const;
  Integrand element(int order, std::size_t index) const;

 private:
  friend ChaosBasis build_basis(int, int, int, double);

  int max_order_ = 0;
  int time_degree_ = 0;
  int num_marks_ = 1;
  double horizon_ = 1.0;
  std::vector<BasisFactor> factors_;
};

ChaosBasis build_basis(int max_order, int time_degree, int num_marks, double horizon);

// Row per path, column per basis element (orders 0..K): J^n of the element.
Eigen::MatrixXd evaluate_features(const Model& model, const ReferenceMeasure& reference,
                                  std::span<const Path> paths, const ChaosBasis& basis, QuadSpec quad = {},
                                  RescaleMode mode = RescaleMode::SqrtPsi, int workers = 1);
// Feature row of a single path.
std::vector<double> feature_row(const MeasureNodes& nodes, const ChaosBasis& basis);

struct ProjectionResult {
  std::vector<std::vector<double>> coefficients;  // per order, from the order-K fit
  std::vector<double> residual_fraction;           // r_m, m = 0..K
  std::vector<double> std_error;                   // MC standard error of r_m
  double condition_number = 0.0;                   // Gram matrix, nonzero columns
  std::vector<std::size_t> dropped_columns;        // identically zero columns
  double target_variance = 0.0;
};

inline constexpr double kDefaultRidge = 1e-8;

// Least-squares projection of y on the basis columns of orders <= m for every
// m, with ridge eps * trace(G)/p on the empirical Gram G (pseudo-inverse when
// eps = 0). Residual fractions use degrees-of-freedom corrected variances.
ProjectionResult project(std::span<const double> y, const Eigen::MatrixXd& features, const ChaosBasis& basis,
                         double ridge = kDefaultRidge);

}  // namespace mppchaos
