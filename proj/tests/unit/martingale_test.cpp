#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "mppchaos/martingale.hpp"
#include "support.hpp"

namespace mppchaos {
namespace {

using testing::ctmc_spec;
using testing::error_code_of;
using testing::make_path;
using testing::poisson_spec;

int g_warnings = 0;
void count_warning(std::string_view) { ++g_warnings; }

TEST(CompensatorDensity, Examples) {
  const auto poisson = validate_model(poisson_spec(2.0));
  EXPECT_DOUBLE_EQ(compensator_density(poisson, make_path({{0.2, 0}}), 0.7, 0), 2.0);
  const auto ctmc = validate_model(ctmc_spec());
  EXPECT_DOUBLE_EQ(compensator_density(ctmc, make_path({{0.2, 1}}), 0.7, 1), 2.0);
  EXPECT_DOUBLE_EQ(compensator_density(ctmc, make_path({{0.2, 1}}), 0.7, 0), 0.0);
}

TEST(Psi, Examples) {
  const auto poisson = validate_model(poisson_spec(2.0));
  EXPECT_DOUBLE_EQ(psi(poisson, {}, make_path({}), 0.4, 0), 0.5);
  const auto ctmc = validate_model(ctmc_spec());
  EXPECT_DOUBLE_EQ(psi(ctmc, {}, make_path({}), 0.4, 1), 1.0);
  EXPECT_DOUBLE_EQ(psi(ctmc, {}, make_path({{0.2, 1}}), 0.4, 1), 0.5);
  EXPECT_EQ(error_code_of([&] { psi(ctmc, {}, make_path({}), 0.4, 0); }), ErrorCode::ZeroCompensator);
}

TEST(Psi, AboveOneWarns) {
  const auto slow = validate_model(poisson_spec(0.5));
  g_warnings = 0;
  set_warning_sink(&count_warning);
  EXPECT_DOUBLE_EQ(psi(slow, {}, make_path({}), 0.4, 0), 2.0);
  set_warning_sink(nullptr);
  EXPECT_EQ(g_warnings, 1);
}

TEST(MeasureNodes, EmptyPoissonPath) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto sqrt_nodes = measure_nodes(model, ZetaSpec{}, make_path({}));
  EXPECT_TRUE(sqrt_nodes.atoms.empty());
  EXPECT_NEAR(sqrt_nodes.total_cell_mass(), -std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(sqrt_nodes.total_cell_mass(), -1.414214, 1e-6);
  const auto raw = measure_nodes(model, ZetaSpec{}, make_path({}), {}, RescaleMode::None);
  EXPECT_NEAR(raw.total_cell_mass(), -2.0, 1e-14);
}

TEST(MeasureNodes, SingleJumpAtom) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto nodes = measure_nodes(model, ZetaSpec{}, make_path({{0.5, 0}}));
  ASSERT_EQ(nodes.atoms.size(), 1u);
  EXPECT_NEAR(nodes.atoms[0].weight, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(nodes.atoms[0].weight, 0.707107, 1e-6);
  EXPECT_EQ(nodes.segments.size(), 2u);
}

// Under dm = psi dq the continuous part is minus the reference measure,
// whatever the path.
TEST(MeasureNodes, PsiModeCellsCarryMinusZeta) {
  const auto model = validate_model(ctmc_spec());
  ZetaSpec zeta;
  zeta.density = {TimeDensity::Kind::Linear, 1.0, 0.5};
  for (const auto& path : {make_path({}), make_path({{0.3, 1}}), make_path({{0.1, 1}, {0.6, 1}, {0.9, 1}})}) {
    const auto nodes = measure_nodes(model, zeta, path, {}, RescaleMode::Psi);
    EXPECT_NEAR(nodes.total_cell_mass(), -1.25, 1e-13);
  }
}

TEST(MeasureNodes, RejectsCoarseGrid) {
  const auto model = validate_model(poisson_spec(2.0));
  EXPECT_EQ(error_code_of([&] { measure_nodes(model, ZetaSpec{}, make_path({}), {1}); }), ErrorCode::GridTooCoarse);
}

TEST(RescaleMode, Parse) {
  EXPECT_EQ(parse_rescale_mode("psi"), RescaleMode::Psi);
  EXPECT_STREQ(to_string(RescaleMode::SqrtPsi), "sqrt_psi");
  EXPECT_EQ(error_code_of([] { parse_rescale_mode("half"); }), ErrorCode::ConfigError);
}

}  // namespace
}  // namespace mppchaos
