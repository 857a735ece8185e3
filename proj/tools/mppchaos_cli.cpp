#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mppchaos/config.hpp"
#include "mppchaos/error.hpp"
#include "mppchaos/harness.hpp"
#include "mppchaos/model.hpp"
#include "mppchaos/path.hpp"

namespace {

enum ExitCode { kPass = 0, kSuiteFailure = 1, kConfigError = 2, kRuntimeError = 3 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> mode;
  std::optional<int> workers;
  std::string out;
  std::vector<std::string> suites;
};

mppchaos::SuiteConfig load(const Overrides& o) {
  auto cfg = mppchaos::load_config(o.config);
  if (o.seed) cfg.sim.seed = *o.seed;
  if (o.paths) cfg.sim.paths = *o.paths;
  if (o.mode) cfg.mode = mppchaos::parse_rescale_mode(*o.mode);
  if (o.workers) cfg.sim.workers = *o.workers;
  if (!o.suites.empty()) {
    const auto& known = mppchaos::suite_names();
    for (const auto& s : o.suites)
      if (std::find(known.begin(), known.end(), s) == known.end())
        throw mppchaos::Error(mppchaos::ErrorCode::ConfigError, "unknown suite '" + s + "'");
    cfg.suites = o.suites;
  }
  return cfg;
}

// --out FILE writes CSV to FILE and the JSON mirror next to it.
void route_report_outputs(mppchaos::SuiteConfig& cfg, const std::string& out) {
  if (out.empty()) return;
  cfg.output.csv = out;
  cfg.output.json = std::filesystem::path(out).replace_extension(".json").string();
}

void print_failures(const mppchaos::Report& report) {
  for (const auto& row : report.failures())
    std::cerr << "FAIL " << row.test << " estimate=" << mppchaos::format_number(row.estimate)
              << " target=" << mppchaos::format_number(row.target)
              << " z=" << mppchaos::format_number(row.z_score) << '\n';
}

int simulate(const Overrides& o) {
  auto cfg = load(o);
  const auto model = mppchaos::validate_model(cfg.model, cfg.zeta);
  const auto paths = mppchaos::sample_paths(model, cfg.sim.seed, cfg.sim.paths, cfg.sim.workers, cfg.sim.jump_cap);
  const std::string target = !o.out.empty() ? o.out : cfg.output.paths;
  if (target.empty()) {
    mppchaos::write_paths_csv(std::cout, paths, model.spec().marks);
  } else {
    std::ofstream file(target);
    if (!file) throw mppchaos::Error(mppchaos::ErrorCode::ConfigError, "cannot write '" + target + "'");
    mppchaos::write_paths_csv(file, paths, model.spec().marks);
  }
  return kPass;
}

int verify(const Overrides& o) {
  auto cfg = load(o);
  route_report_outputs(cfg, o.out);
  const auto report = mppchaos::run(cfg);
  if (cfg.output.csv.empty()) mppchaos::write_report_csv(std::cout, report);
  mppchaos::write_outputs(cfg, report);
  print_failures(report);
  return report.all_pass() ? kPass : kSuiteFailure;
}

int project(const Overrides& o) {
  auto cfg = load(o);
  const auto result = mppchaos::projection_table(cfg);
  if (o.out.empty()) {
    mppchaos::write_completeness_csv(std::cout, result);
  } else {
    std::ofstream file(o.out);
    if (!file) throw mppchaos::Error(mppchaos::ErrorCode::ConfigError, "cannot write '" + o.out + "'");
    mppchaos::write_completeness_csv(file, result);
  }
  bool pass = true;
  for (const auto& e : result.entries) pass = pass && e.status != mppchaos::RowStatus::Fail;
  return pass ? kPass : kSuiteFailure;
}

int oracle(const Overrides& o) {
  auto cfg = load(o);
  route_report_outputs(cfg, o.out);
  const auto report = mppchaos::oracle_table(cfg);
  if (cfg.output.csv.empty()) mppchaos::write_report_csv(std::cout, report);
  mppchaos::write_outputs(cfg, report);
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Martingale measures, iterated integrals and chaos checks for marked point processes"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override sim.seed");
    sub->add_option("--paths", o.paths, "Override sim.paths")->check(CLI::PositiveNumber);
    sub->add_option("--mode", o.mode, "Rescale mode")->check(CLI::IsMember({"sqrt_psi", "psi", "none"}));
    sub->add_option("--workers", o.workers, "Override sim.workers")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output file (reports also get a .json mirror)");
  };

  auto* sim = app.add_subcommand("simulate", "Sample paths and write path_id,alpha,time,mark CSV");
  add_common(sim);
  auto* ver = app.add_subcommand("verify", "Run verification suites and write the report");
  add_common(ver);
  ver->add_option("--suite", o.suites, "Suite to run (repeatable; default: config selection)")
      ->check(CLI::IsMember(mppchaos::suite_names()));
  auto* proj = app.add_subcommand("project", "Chaos projection residual table");
  add_common(proj);
  auto* orc = app.add_subcommand("oracle", "Exact oracle values for the configured model");
  add_common(orc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return simulate(o);
    if (*ver) return verify(o);
    if (*proj) return project(o);
    if (*orc) return oracle(o);
  } catch (const mppchaos::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == mppchaos::ErrorCode::ConfigError ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kRuntimeError;
}
