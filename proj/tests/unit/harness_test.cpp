#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "mppchaos/config.hpp"
#include "mppchaos/harness.hpp"
#include "mppchaos/report.hpp"
#include "mppchaos/stats.hpp"
#include "support.hpp"

namespace mppchaos {
namespace {

using testing::error_code_of;

std::string small_config(const std::string& extra = "", std::size_t paths = 3000) {
  return R"({
    "name": "small",
    "model": {"kind": "poisson", "rate": 2.0, "representation": "jump_increment", "group": "cyclic"},
    "sim": {"paths": )" + std::to_string(paths) + R"(, "seed": 99},
    "chaos": {"max_order": 2, "functionals": ["exp_neg_count"]})" + extra + "}";
}

TEST(McStats, Examples) {
  const std::vector<double> same(5, 1.25);
  const auto c = mc_stats(same);
  EXPECT_EQ(c.mean, 1.25);
  EXPECT_EQ(c.std_error, 0.0);
  EXPECT_EQ(c.ci_low, 1.25);
  EXPECT_EQ(c.ci_high, 1.25);
  const std::vector<double> v = {1, 2, 3, 4};
  const auto s = mc_stats(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_NEAR(s.std_error, 0.6455, 1e-4);
  const std::vector<double> one = {1.0};
  EXPECT_EQ(error_code_of([&] { mc_stats(one); }), ErrorCode::TooFewSamples);
}

TEST(Config, ParsesAndDefaults) {
  const auto cfg = parse_config(small_config());
  EXPECT_EQ(cfg.sim.seed, 99u);
  EXPECT_EQ(cfg.suites, suite_names());
  EXPECT_EQ(cfg.tolerance.z, 3.5);
  EXPECT_EQ(cfg.tolerance.exact, 1e-9);
  EXPECT_EQ(cfg.mode, RescaleMode::SqrtPsi);
}

TEST(Config, Errors) {
  EXPECT_EQ(error_code_of([] { parse_config(R"({"model": {"kind": "poisson", "rate": 1}, "sim": {"paths": 10}})"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(error_code_of([] { parse_config(small_config(R"(, "suites": ["isometry", "nonsense"])")); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(error_code_of([] { parse_config(small_config(R"(, "extra_key": 1)")); }), ErrorCode::ConfigError);
  EXPECT_EQ(error_code_of([] { parse_config("{ not json"); }), ErrorCode::ConfigError);
  EXPECT_EQ(error_code_of([] { load_config("/nonexistent/config.json"); }), ErrorCode::ConfigError);
}

TEST(ReportRows, StatisticalAndExactSemantics) {
  const auto pass = statistical_row("t", "s", 1.0, 0.1, 1.3, 0.0, 3.5, "p");
  EXPECT_NEAR(pass.z_score, -3.0, 1e-9);
  EXPECT_EQ(pass.status, RowStatus::Pass);
  const auto fail = statistical_row("t", "s", 1.0, 0.1, 1.4, 0.0, 3.5, "p");
  EXPECT_EQ(fail.status, RowStatus::Fail);
  const auto bounded = statistical_row("t", "s", 1.0, 0.1, 1.4, 0.1, 3.5, "p");
  EXPECT_EQ(bounded.status, RowStatus::Pass);
  EXPECT_EQ(exact_row("t", "s", 1.0 + 5e-10, 1.0, 1e-9, "p").status, RowStatus::Pass);
  EXPECT_EQ(exact_row("t", "s", 1.0 + 2e-9, 1.0, 1e-9, "p").status, RowStatus::Fail);
  EXPECT_TRUE(std::isnan(exact_row("t", "s", 1.0, 1.0, 1e-9, "p").z_score));
}

TEST(ReportRows, InfoRowsNeverFail) {
  Report r;
  r.add(info_row("i", "s", 100.0, 0.1, 0.0, "p"));
  EXPECT_TRUE(r.all_pass());
  r.add(exact_row("e", "s", 1.0, 0.0, 1e-9, "p"));
  EXPECT_FALSE(r.all_pass());
  EXPECT_EQ(r.failures().size(), 1u);
}

TEST(ReportOutput, CsvHeaderAndJsonMirror) {
  Report r;
  r.stamp = {{"seed", "1"}};
  r.add(statistical_row("a,b", "mean", 0.5, 0.25, 0.0, 0.0, 3.5, "p"));
  std::ostringstream csv, json;
  write_report_csv(csv, r);
  write_report_json(json, r);
  EXPECT_EQ(csv.str(), "test,statistic,estimate,std_error,target,z_score,pass\n\"a,b\",mean,0.5,0.25,0,2,pass\n");
  EXPECT_NE(json.str().find("\"test\": \"a,b\""), std::string::npos);
  EXPECT_NE(json.str().find("\"all_pass\": true"), std::string::npos);
}

TEST(Run, PsiModeReportsZetaFormDeviationAsInfo) {
  auto cfg = parse_config(small_config(R"(, "suites": ["isometry"], "mode": {"rescale": "psi"})"));
  const auto report = run(cfg);
  bool saw_info = false;
  for (const auto& row : report.rows) {
    if (row.test.find("zeta_form_deviation") != std::string::npos) {
      EXPECT_EQ(row.status, RowStatus::Info);
      EXPECT_GT(std::abs(row.z_score), 3.5);
      saw_info = true;
    }
  }
  EXPECT_TRUE(saw_info);
  EXPECT_TRUE(report.all_pass());
}

TEST(Run, ReportBytesIndependentOfWorkers) {
  auto cfg = parse_config(small_config());
  std::ostringstream a, b;
  cfg.sim.workers = 1;
  write_report_json(a, run(cfg));
  cfg.sim.workers = 3;
  write_report_json(b, run(cfg));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Run, UnknownFunctionalIsConfigError) {
  auto cfg = parse_config(small_config());
  cfg.chaos.functionals = {"median"};
  cfg.suites = {"completeness"};
  EXPECT_EQ(error_code_of([&] { run(cfg); }), ErrorCode::ConfigError);
}

}  // namespace
}  // namespace mppchaos
