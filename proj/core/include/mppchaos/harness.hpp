#pragma once

#include <span>
#include <string>
#include <vector>

#include "mppchaos/completeness.hpp"
#include "mppchaos/config.hpp"
#include "mppchaos/path.hpp"
#include "mppchaos/report.hpp"

namespace mppchaos {

// Samples the configured paths and runs the selected suites in order.
Report run(const SuiteConfig& config);
// Runs the selected suites on a given path set.
Report run_suites(const SuiteConfig& config, const Model& model, std::span<const Path> paths);

// Individual suites (rows appended to `report`).
void martingale_suite(const SuiteConfig& config, const Model& model, std::span<const Path> paths, Report& report);
void isometry_suite(const SuiteConfig& config, const Model& model, std::span<const Path> paths, Report& report);
void orthogonality_suite(const SuiteConfig& config, const Model& model, std::span<const Path> paths, Report& report);
void completeness_suite(const SuiteConfig& config, const Model& model, std::span<const Path> paths, Report& report);
void oracle_suite(const SuiteConfig& config, const Model& model, std::span<const Path> paths, Report& report);
void boundary_suite(const SuiteConfig& config, const Model& model, std::span<const Path> paths, Report& report);
void telescoping_suite(const SuiteConfig& config, const Model& model, std::span<const Path> paths, Report& report);

// Completeness table for the configured functionals (the `project` command).
CompletenessResult projection_table(const SuiteConfig& config);
// Oracle values of the library functionals and occupancies (the `oracle` command).
Report oracle_table(const SuiteConfig& config);

// Writes the CSV/JSON files named in config.output, if any.
void write_outputs(const SuiteConfig& config, const Report& report);

// Path-set size used by the per-path identity suites.
inline constexpr std::size_t kIdentityPaths = 200;

}  // namespace mppchaos
