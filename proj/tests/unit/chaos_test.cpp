#include <gtest/gtest.h>

#include <cmath>

#include "mppchaos/chaos.hpp"
#include "mppchaos/quadrature.hpp"
#include "support.hpp"

namespace mppchaos {
namespace {

using testing::ctmc_spec;
using testing::error_code_of;
using testing::make_path;
using testing::poisson_spec;

TEST(BuildBasis, Counts) {
  const auto b1 = build_basis(1, 0, 1, 1.0);
  EXPECT_EQ(b1.count(0), 1u);
  EXPECT_EQ(b1.count(1), 1u);
  EXPECT_EQ(build_basis(2, 1, 2, 1.0).count(2), 16u);
  const auto b0 = build_basis(0, 0, 3, 1.0);
  EXPECT_EQ(b0.total(), 1u);
  EXPECT_EQ(build_basis(2, 1, 2, 1.0).offset(2), 5u);
}

TEST(BuildBasis, TupleOrderAndFactorValues) {
  const auto b = build_basis(2, 1, 2, 2.0);
  // factors: (deg 0, mark 0), (deg 0, mark 1), (deg 1, mark 0), (deg 1, mark 1)
  EXPECT_EQ(b.tuple(2, 6), (std::vector<int>{1, 2}));
  EXPECT_DOUBLE_EQ(b.factor_value(3, 1.5, 1), 0.5);
  EXPECT_DOUBLE_EQ(b.factor_value(3, 1.5, 0), 0.0);
}

TEST(BuildBasis, Caps) {
  EXPECT_EQ(error_code_of([] { build_basis(5, 0, 1, 1.0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code_of([] { build_basis(3, 6, 4, 1.0); }), ErrorCode::SizeCap);
  EXPECT_EQ(error_code_of([] { build_basis(4, 6, 4, 1.0); }), ErrorCode::SizeCap);
}

TEST(Features, ConstantColumnAndOrderOneClosedForm) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto basis = build_basis(2, 0, 1, 1.0);
  const auto paths = sample_paths(model, 21, 300);
  const auto f = evaluate_features(model, ReferenceMeasure(model, {}), paths, basis);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    EXPECT_EQ(f(i, 0), 1.0);
    EXPECT_NEAR(f(i, 1), (paths[i].size() - 2.0) / std::sqrt(2.0), 1e-13);
  }
}

TEST(Features, IndependentOfWorkers) {
  const auto model = validate_model(ctmc_spec());
  const auto basis = build_basis(3, 1, 2, 1.0);
  const auto paths = sample_paths(model, 22, 300);
  const ReferenceMeasure ref(model, {});
  const auto a = evaluate_features(model, ref, paths, basis, {}, RescaleMode::SqrtPsi, 1);
  const auto b = evaluate_features(model, ref, paths, basis, {}, RescaleMode::SqrtPsi, 3);
  EXPECT_TRUE(a == b);
}

// On the empty path only the continuous part remains:
// J^2(f1, f2) = c^2 int_0^1 f1(s) int_0^s f2(u) du ds with c the cell
// density, checked against nested Gauss-Legendre rules on the triangle.
TEST(Features, EmptyPathMatchesTriangleQuadrature) {
  const auto model = validate_model(poisson_spec(2.0, {0.5, 0.5}));
  const auto basis = build_basis(2, 2, 2, 1.0);
  const auto nodes = measure_nodes(model, ZetaSpec{}, make_path({}));
  const auto row = feature_row(nodes, basis);
  const GaussLegendre rule(20);
  // rho = 1 per mark, nu = 1/2 per mark, so -sqrt(psi) rho = -sqrt(1/2)
  const double density = -std::sqrt(0.5);
  for (std::size_t idx = 0; idx < basis.count(2); ++idx) {
    const auto t = basis.tuple(2, idx);
    const double expected = density * density * rule.integrate(
        [&](double s) {
          return basis.factor_value(t[0], s, basis.factors()[t[0]].mark) *
                 rule.integrate([&](double u) { return basis.factor_value(t[1], u, basis.factors()[t[1]].mark); },
                                0.0, s);
        },
        0.0, 1.0);
    EXPECT_NEAR(row[basis.offset(2) + idx], expected, 1e-12) << idx;
  }
}

TEST(Project, FeatureItselfHasZeroResidual) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto basis = build_basis(2, 0, 1, 1.0);
  const auto paths = sample_paths(model, 23, 2000);
  const auto f = evaluate_features(model, ReferenceMeasure(model, {}), paths, basis);
  std::vector<double> y(paths.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(i, 1);
  const auto r = project(y, f, basis, 0.0);
  EXPECT_NEAR(r.residual_fraction[1], 0.0, 1e-10);
  EXPECT_NEAR(r.coefficients[1][0], 1.0, 1e-10);
  EXPECT_NEAR(r.residual_fraction[0], 1.0, 1e-10);
}

TEST(Project, CountIsOrderOne) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto basis = build_basis(1, 0, 1, 1.0);
  const auto paths = sample_paths(model, 24, 100000);
  const auto f = evaluate_features(model, ReferenceMeasure(model, {}), paths, basis);
  std::vector<double> y;
  for (const auto& p : paths) y.push_back(p.size());
  const auto r = project(y, f, basis);
  EXPECT_NEAR(r.coefficients[0][0], 2.0, 1e-6);
  EXPECT_NEAR(r.coefficients[1][0], std::sqrt(2.0), 1e-6);
  EXPECT_LT(r.residual_fraction[1], 1e-3);
}

TEST(Project, CountSquaredIsOrderTwo) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto basis = build_basis(2, 0, 1, 1.0);
  const auto paths = sample_paths(model, 25, 100000);
  const auto f = evaluate_features(model, ReferenceMeasure(model, {}), paths, basis);
  std::vector<double> y;
  for (const auto& p : paths) y.push_back(double(p.size()) * p.size());
  const auto r = project(y, f, basis);
  EXPECT_LT(r.residual_fraction[2], 1e-2);
  for (std::size_t m = 1; m < r.residual_fraction.size(); ++m)
    EXPECT_LE(r.residual_fraction[m], r.residual_fraction[m - 1] + 1e-12);
}

TEST(Project, ConstantTargetHasZeroResidual) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto basis = build_basis(1, 0, 1, 1.0);
  const auto paths = sample_paths(model, 26, 500);
  const auto f = evaluate_features(model, ReferenceMeasure(model, {}), paths, basis);
  const std::vector<double> y(paths.size(), 4.2);
  const auto r = project(y, f, basis);
  EXPECT_EQ(r.residual_fraction[0], 0.0);
}

TEST(Project, DimensionMismatch) {
  const auto basis = build_basis(1, 0, 1, 1.0);
  const Eigen::MatrixXd f = Eigen::MatrixXd::Ones(10, 2);
  const std::vector<double> y(9, 1.0);
  EXPECT_EQ(error_code_of([&] { project(y, f, basis); }), ErrorCode::DimensionMismatch);
}

}  // namespace
}  // namespace mppchaos
