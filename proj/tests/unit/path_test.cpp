#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mppchaos/functional.hpp"
#include "mppchaos/oracle.hpp"
#include "mppchaos/stats.hpp"
#include "support.hpp"

namespace mppchaos {
namespace {

using testing::ctmc_spec;
using testing::error_code_of;
using testing::make_path;
using testing::poisson_spec;
using testing::renewal_spec;

std::vector<double> counts(const std::vector<Path>& paths) {
  std::vector<double> n;
  for (const auto& p : paths) n.push_back(p.size());
  return n;
}

TEST(SamplePaths, PoissonMeanCount) {
  const auto model = validate_model(poisson_spec(2.0));
  const auto paths = sample_paths(model, 42, 100000);
  const auto s = mc_stats(counts(paths));
  EXPECT_LE(std::abs(s.mean - 2.0), 3.5 * s.std_error);
}

TEST(SamplePaths, VanishingRateGivesEmptyPaths) {
  const auto model = validate_model(poisson_spec(1e-12));
  for (const auto& p : sample_paths(model, 3, 1000)) EXPECT_EQ(p.size(), 0);
}

TEST(SamplePaths, CtmcMeanCountMatchesOracle) {
  const auto model = validate_model(ctmc_spec());
  const auto paths = sample_paths(model, 43, 100000);
  const auto s = mc_stats(counts(paths));
  const auto oracle = oracle_expectation(model, count_functional());
  EXPECT_LE(std::abs(s.mean - oracle.value), 3.5 * s.std_error + oracle.error_bound);
}

TEST(SamplePaths, RenewalMeanCountMatchesOracle) {
  auto spec = renewal_spec();
  std::get<Renewal>(spec.kind).hazard = {HazardFamily::Kind::Power, 0.5, 2.0, 1.5};
  const auto model = validate_model(spec);
  const auto paths = sample_paths(model, 44, 50000);
  const auto s = mc_stats(counts(paths));
  const auto oracle = oracle_expectation(model, count_functional());
  EXPECT_LE(std::abs(s.mean - oracle.value), 3.5 * s.std_error + oracle.error_bound);
}

TEST(SamplePaths, IndependentOfWorkerCount) {
  const auto model = validate_model(ctmc_spec());
  const auto a = sample_paths(model, 9, 2000, 1);
  const auto b = sample_paths(model, 9, 2000, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].events, b[i].events);
}

TEST(SamplePaths, PathsAreValid) {
  const auto model = validate_model(ctmc_spec());
  for (const auto& p : sample_paths(model, 10, 500)) {
    EXPECT_NO_THROW(check_path(model, p));
    for (const auto& j : p.events) EXPECT_EQ(j.mark, 1);
  }
}

TEST(SamplePaths, JumpCapExceeded) {
  const auto model = validate_model(poisson_spec(1e6));
  EXPECT_EQ(error_code_of([&] { sample_path(model, {1, 0}, 10); }), ErrorCode::JumpCapExceeded);
}

TEST(IntervalIndex, BoundaryConvention) {
  const auto p = make_path({{0.5, 0}});
  EXPECT_EQ(interval_index(p, 0.5), 0);
  EXPECT_EQ(interval_index(p, 0.50001), 1);
  EXPECT_EQ(interval_index(make_path({}), 0.7), 0);
}

TEST(CheckPath, RejectsUnorderedOrOutsideSupport) {
  const auto model = validate_model(ctmc_spec());
  EXPECT_EQ(error_code_of([&] { check_path(model, make_path({{0.5, 1}, {0.4, 1}})); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code_of([&] { check_path(model, make_path({{0.5, 0}})); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code_of([&] { check_path(model, make_path({{1.5, 1}})); }), ErrorCode::InvalidArgument);
}

TEST(WritePathsCsv, Columns) {
  const auto model = validate_model(poisson_spec(2.0, {0.5, 0.5}));
  const std::vector<Path> paths = {make_path({{0.25, 1}}), make_path({}), make_path({{0.5, 0}, {0.75, 1}})};
  std::ostringstream os;
  write_paths_csv(os, paths, model.spec().marks);
  EXPECT_EQ(os.str(), "path_id,alpha,time,mark\n0,1,0.25,1\n2,1,0.5,0\n2,2,0.75,1\n");
}

}  // namespace
}  // namespace mppchaos
