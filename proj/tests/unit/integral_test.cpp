#include <gtest/gtest.h>

#include <cmath>

#include "mppchaos/integral.hpp"
#include "support.hpp"

namespace mppchaos {
namespace {

using testing::ctmc_spec;
using testing::error_code_of;
using testing::make_path;
using testing::poisson_spec;

const Integrand kOne = Integrand::deterministic([](double, int) { return 1.0; });

MeasureNodes poisson_nodes(std::vector<Jump> jumps, RescaleMode mode = RescaleMode::SqrtPsi) {
  static const Model model = validate_model(poisson_spec(2.0));
  return measure_nodes(model, ZetaSpec{}, make_path(std::move(jumps)), {}, mode);
}

TEST(Integrate, Examples) {
  EXPECT_EQ(integrate(poisson_nodes({{0.5, 0}}), Integrand::constant(0.0, 1)), 0.0);
  EXPECT_NEAR(integrate(poisson_nodes({}), kOne), -1.414214, 1e-6);
  EXPECT_NEAR(integrate(poisson_nodes({{0.5, 0}}), kOne), 1.0 / std::sqrt(2.0) - std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(integrate(poisson_nodes({{0.5, 0}}), kOne), -0.707107, 1e-6);
}

TEST(Integrate, WindowsAreAdditive) {
  const auto nodes = poisson_nodes({{0.2, 0}, {0.45, 0}, {0.8, 0}});
  const auto f = Integrand::deterministic([](double t, int) { return std::cos(3 * t); });
  const double whole = integrate(nodes, f);
  const double parts = integrate_window(nodes, f, 0.0, 0.2) + integrate_window(nodes, f, 0.2, 0.3) +
                       integrate_window(nodes, f, 0.3, 0.8) + integrate_window(nodes, f, 0.8, 1.0);
  EXPECT_NEAR(whole, parts, 1e-13);
  // (s, t] windows include the atom at t, not the one at s
  EXPECT_NEAR(integrate_window(nodes, kOne, 0.2, 0.45) - integrate_window(nodes, kOne, 0.2 + 1e-12, 0.45), 0.0, 1e-9);
}

TEST(IteratedJ, Examples) {
  const auto nodes = poisson_nodes({{0.5, 0}});
  EXPECT_NEAR(iterated_J(nodes, 1, Integrand::constant(1.0, 1)), integrate(nodes, kOne), 1e-15);
  EXPECT_NEAR(iterated_J(nodes, 2, Integrand::constant(1.0, 2)), 0.0, 1e-14);
  EXPECT_NEAR(iterated_J(poisson_nodes({{0.3, 0}, {0.8, 0}}), 2, Integrand::constant(1.0, 2)), -0.5, 1e-14);
  EXPECT_NEAR(iterated_J(poisson_nodes({{0.05, 0}, {0.99, 0}}), 2, Integrand::constant(1.0, 2)), -0.5, 1e-14);
}

TEST(IteratedJ, ErrorContracts) {
  const auto nodes = poisson_nodes({});
  EXPECT_EQ(error_code_of([&] { iterated_J(nodes, 2, kOne); }), ErrorCode::ArityMismatch);
  const Integrand general(5, [](std::span<const Point>) { return 1.0; });
  EXPECT_EQ(error_code_of([&] { iterated_J(nodes, 5, general); }), ErrorCode::DepthTooLarge);
}

// J^2(1) = (M^2 - sum of squared atoms) / 2 path by path, M = int 1 dm.
TEST(IteratedJ, ProductFormulaOnSampledPaths) {
  for (const auto& spec : {poisson_spec(2.0), ctmc_spec()}) {
    const auto model = validate_model(spec);
    for (const auto& path : sample_paths(model, 17, 200)) {
      const auto nodes = measure_nodes(model, ZetaSpec{}, path);
      const double m = integrate(nodes, kOne);
      double bracket = 0.0;
      for (const auto& a : nodes.atoms) bracket += a.weight * a.weight;
      EXPECT_NEAR(iterated_J(nodes, 2, Integrand::constant(1.0, 2)), 0.5 * (m * m - bracket), 1e-12);
    }
  }
}

// The single-sweep evaluator agrees with the recursive one for separable
// integrands of mixed time and mark dependence.
TEST(IteratedJ, SweepMatchesRecursive) {
  const auto model = validate_model(poisson_spec(3.0, {0.4, 0.6}));
  const auto g = Integrand::separable({[](double t, int x) { return 1.0 + t * (x + 1); },
                                       [](double t, int) { return std::exp(-t); },
                                       [](double t, int x) { return x == 0 ? t : 1.0 - t; }});
  for (const auto& path : sample_paths(model, 5, 40)) {
    const auto nodes = measure_nodes(model, ZetaSpec{}, path);
    EXPECT_NEAR(iterated_J(nodes, 3, g), iterated_J_recursive(nodes, 3, g), 1e-11);
  }
}

TEST(IteratedI, Examples) {
  IteratedFamily constant_only;
  constant_only.g0 = 3.7;
  EXPECT_DOUBLE_EQ(iterated_I(poisson_nodes({{0.5, 0}}), constant_only, 0.5, 0), 3.7);

  IteratedFamily fam;
  fam.g0 = 1.0;
  fam.terms.push_back(kOne);
  EXPECT_NEAR(iterated_I(poisson_nodes({}), fam, 1.0, 1), 1.0 - std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(iterated_I(poisson_nodes({}), fam, 1.0, 1), -0.414214, 1e-6);

  fam.g0 = 0.0;
  EXPECT_NEAR(iterated_I(poisson_nodes({{0.5, 0}}), fam, 0.5, 1), -0.707107, 1e-6);
  EXPECT_NEAR(iterated_I_recursive(poisson_nodes({{0.5, 0}}), fam, 0.5, 1), -std::sqrt(0.5), 1e-14);
}

TEST(IteratedI, TauOutsideHorizon) {
  IteratedFamily fam;
  fam.terms.push_back(kOne);
  const auto nodes = poisson_nodes({});
  EXPECT_EQ(error_code_of([&] { iterated_I(nodes, fam, 0.0, 1); }), ErrorCode::OutOfHorizon);
  EXPECT_EQ(error_code_of([&] { iterated_I(nodes, fam, 1.5, 1); }), ErrorCode::OutOfHorizon);
}

// With tau = infinity and every cap beyond the path, I^k reduces to the sum
// of iterated integrals of the family.
TEST(IteratedI, AgreesWithJOnEmptyPath) {
  const auto nodes = poisson_nodes({});
  IteratedFamily fam;
  fam.g0 = 0.25;
  fam.terms.push_back(Integrand::deterministic([](double t, int) { return 1.0 + t; }));
  fam.terms.push_back(Integrand::separable({[](double t, int) { return t; }, [](double, int) { return 2.0; }}));
  const double expected = 0.25 + iterated_J(nodes, 1, fam.terms[0]) + iterated_J(nodes, 2, fam.terms[1]);
  EXPECT_NEAR(iterated_I(nodes, fam, kInfiniteTime, 2), expected, 1e-13);
  EXPECT_NEAR(iterated_I_recursive(nodes, fam, kInfiniteTime, 2), expected, 1e-13);
}

TEST(Integrand, SeparableFormMatchesGeneral) {
  const auto g = Integrand::separable({[](double t, int x) { return t + x; }, [](double t, int) { return 2 - t; }});
  EXPECT_TRUE(g.is_separable());
  EXPECT_LT(separable_deviation(g, 1.0, 2, 200, 3), 1e-15);
  const std::vector<Point> args = {{0.7, 1}, {0.2, 0}};
  EXPECT_NEAR(g(args), 1.7 * 1.8, 1e-15);
}

TEST(Integrand, PredictableSeesOnlyStrictPast) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto nodes = measure_nodes(model, ZetaSpec{}, make_path({{0.5, 0}}));
  // 1 + N_{t-}: the atom at 0.5 is weighted by 1, cells after it by 2.
  const auto f = Integrand::predictable([](std::span<const Jump> h, double, int) { return 1.0 + h.size(); });
  const double expected = std::sqrt(0.5) - std::sqrt(0.5) * 2.0 * (0.5 * 1.0 + 0.5 * 2.0);
  EXPECT_NEAR(integrate(nodes, f), expected, 1e-14);
}

TEST(TupleIntegrals, MatchesIndividualIntegrals) {
  const auto model = validate_model(poisson_spec(2.0, {0.5, 0.5}));
  const std::vector<FactorFn> factors = {[](double, int x) { return x == 0 ? 1.0 : 0.0; },
                                         [](double t, int x) { return x == 1 ? t : 0.0; }};
  for (const auto& path : sample_paths(model, 8, 20)) {
    const auto nodes = measure_nodes(model, ZetaSpec{}, path);
    const auto acc = tuple_integrals(nodes, factors, 3);
    EXPECT_DOUBLE_EQ(acc[0][0], 1.0);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const auto g = Integrand::separable({factors[a], factors[b], factors[c]});
          EXPECT_NEAR(acc[3][a * 4 + b * 2 + c], iterated_J_recursive(nodes, 3, g), 1e-12);
        }
  }
}

}  // namespace
}  // namespace mppchaos
