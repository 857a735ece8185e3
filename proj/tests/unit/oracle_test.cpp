#include <gtest/gtest.h>

#include <cmath>

#include "mppchaos/chaos.hpp"
#include "mppchaos/functional.hpp"
#include "mppchaos/oracle.hpp"
#include "support.hpp"

namespace mppchaos {
namespace {

using testing::ctmc_spec;
using testing::error_code_of;
using testing::poisson_spec;
using testing::renewal_spec;

OracleConfig enumeration_only() {
  OracleConfig cfg;
  cfg.closed_form = false;
  return cfg;
}

TEST(OracleExpectation, PoissonClosedForms) {
  const auto model = validate_model(poisson_spec(2.0));
  for (const auto& cfg : {OracleConfig{}, enumeration_only()}) {
    EXPECT_NEAR(oracle_expectation(model, count_functional(), cfg).value, 2.0, 1e-8);
    EXPECT_NEAR(oracle_expectation(model, count_squared_functional(), cfg).value, 6.0, 1e-8);
    const double pgf = std::exp(2.0 * (std::exp(-1.0) - 1.0));
    EXPECT_NEAR(oracle_expectation(model, exp_neg_count_functional(), cfg).value, pgf, 1e-8);
    EXPECT_NEAR(oracle_expectation(model, first_jump_functional(1.0), cfg).value, (1 - std::exp(-2.0)) / 2, 1e-8);
  }
}

// P(X_t = 0) = 2/3 + e^{-3t}/3 and E[N_t] = 4t/3 - (1 - e^{-3t})/9 for the
// two-state chain with exit rates 1 and 2 started in state 0.
TEST(OracleExpectation, CtmcMatchesGeneratorSolution) {
  const auto model = validate_model(ctmc_spec());
  EXPECT_NEAR(oracle_expectation(model, terminal_state_functional(0)).value, 2.0 / 3 + std::exp(-3.0) / 3, 1e-8);
  EXPECT_NEAR(oracle_expectation(model, count_functional()).value, 4.0 / 3 - (1 - std::exp(-3.0)) / 9, 1e-8);
  const JumpLaw law(model);
  for (double t : {0.1, 0.5, 1.0}) {
    double p0 = 0.0;
    for (int n = 0; n <= law.n_max(); ++n) p0 += law.occupancy(n, 0, t);
    EXPECT_NEAR(p0, 2.0 / 3 + std::exp(-3 * t) / 3, 1e-10);
  }
}

TEST(OracleExpectation, TruncationTooLarge) {
  const auto model = validate_model(poisson_spec(2.0));
  OracleConfig cfg;
  cfg.n_max = 3;
  EXPECT_EQ(error_code_of([&] { oracle_expectation(model, count_functional(), cfg); }), ErrorCode::TruncationTooLarge);
}

TEST(Occupancy, Examples) {
  const auto model = validate_model(poisson_spec(2.0));
  EXPECT_NEAR(occupancy_probability(model, 0, 1.0), std::exp(-2.0), 1e-12);
  EXPECT_NEAR(occupancy_probability(model, 0, 1.0), 0.135335, 1e-6);
  EXPECT_NEAR(occupancy_probability(model, 0, 1e-9), 1.0, 1e-8);
  EXPECT_EQ(error_code_of([&] { occupancy_probability(model, 0, 1.5); }), ErrorCode::OutOfHorizon);
}

TEST(Occupancy, PartitionOfUnity) {
  auto spec = renewal_spec();
  std::get<Renewal>(spec.kind).hazard = {HazardFamily::Kind::Exponential, 1.0, 0.5, 1.0};
  for (const auto& s : {poisson_spec(2.0), ctmc_spec(), spec}) {
    const auto model = validate_model(s);
    const JumpLaw law(model, enumeration_only());
    for (double t : {0.05, 0.3, 0.77, 1.0}) {
      double sum = 0.0;
      for (int n = 0; n <= law.n_max(); ++n) sum += law.occupancy(n, t);
      EXPECT_NEAR(sum, 1.0, law.truncation_probability() + 1e-12);
    }
  }
}

TEST(ZetaInnerProduct, Examples) {
  const auto model = validate_model(poisson_spec(2.0));
  const FactorFn one = [](double, int) { return 1.0; };
  const FactorFn t = [](double s, int) { return s; };
  EXPECT_NEAR(zeta_inner_product(one, one, model, {}).value, 1.0, 1e-12);
  EXPECT_NEAR(zeta_inner_product(one, t, model, {}).value, 0.5, 1e-12);
  // mark 0 never carries compensator mass in the chain, so nu gives it 0
  const auto ctmc = validate_model(ctmc_spec());
  const FactorFn mark0 = [](double, int x) { return x == 0 ? 1.0 : 0.0; };
  EXPECT_EQ(zeta_inner_product(mark0, mark0, ctmc, {}).value, 0.0);
}

// For Poisson, psi = nu / (lambda mu) is deterministic, so the psi-weighted
// form is the zeta form scaled by psi.
TEST(PsiWeightedInnerProduct, PoissonIsScaledZetaForm) {
  const auto model = validate_model(poisson_spec(4.0));
  const FactorFn t = [](double s, int) { return s; };
  EXPECT_NEAR(psi_weighted_inner_product(t, t, model, {}).value, 0.25 / 3.0, 1e-12);
}

// Poisson e^{-N}: order-n chaos variance a^2 (b^2 mu)^n / n! with
// a = E e^{-N}, b = e^{-1} - 1, mu = lambda H.
TEST(ChaosTail, ExpNegCountMatchesCharlierExpansion) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto basis = build_basis(3, 0, 1, 1.0);
  const auto tail = chaos_tail(model, {}, exp_neg_count_functional(), basis);
  const double mu = 2.0, b = std::exp(-1.0) - 1.0;
  const double a2 = std::exp(2 * mu * b);
  const double second = std::exp(mu * (std::exp(-2.0) - 1.0));
  const double var = second - a2;
  EXPECT_NEAR(tail.variance, var, 1e-10);
  double captured = a2;
  for (int m = 0; m <= 3; ++m) {
    if (m > 0) captured += a2 * std::pow(b * b * mu, m) / std::tgamma(m + 1.0);
    EXPECT_NEAR(tail.residual_fraction[m], (second - captured) / var, 1e-8) << m;
  }
  for (int m = 1; m <= 3; ++m) EXPECT_LT(tail.residual_fraction[m], tail.residual_fraction[m - 1]);
  EXPECT_GT(tail.residual_fraction[3], 0.0);
}

TEST(ChaosTail, CountAndConstant) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto basis = build_basis(1, 0, 1, 1.0);
  EXPECT_NEAR(chaos_tail(model, {}, count_functional(), basis).residual_fraction[1], 0.0, 1e-8);
  EXPECT_EQ(chaos_tail(model, {}, constant_functional(3.0), basis).residual_fraction[0], 0.0);
}

TEST(ChaosTail, PrunesDeadMarksAndIsMonotone) {
  const auto model = validate_model(ctmc_spec());
  const auto basis = build_basis(3, 1, 2, 1.0);
  const auto tail = chaos_tail(model, {}, terminal_state_functional(0), basis);
  EXPECT_EQ(tail.pruned_factors, (std::vector<int>{0, 2}));
  for (int m = 1; m <= 3; ++m) EXPECT_LE(tail.residual_fraction[m], tail.residual_fraction[m - 1] + 1e-12);
}

TEST(ChaosTail, NonMarkovUnsupported) {
  const auto model = validate_model(renewal_spec());
  const auto basis = build_basis(1, 0, 2, 1.0);
  EXPECT_EQ(error_code_of([&] { chaos_tail(model, {}, count_functional(), basis); }), ErrorCode::Unsupported);
}

TEST(Functional, ByName) {
  EXPECT_EQ(functional_by_name("terminal_state:1", 1.0).name, "terminal_state:1");
  EXPECT_EQ(functional_by_name("constant:2.5", 1.0).terminal(3, 0), 2.5);
  EXPECT_EQ(error_code_of([] { functional_by_name("median", 1.0); }), ErrorCode::ConfigError);
}

}  // namespace
}  // namespace mppchaos
