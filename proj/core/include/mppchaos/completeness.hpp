#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mppchaos/chaos.hpp"
#include "mppchaos/functional.hpp"
#include "mppchaos/oracle.hpp"
#include "mppchaos/report.hpp"

namespace mppchaos {

struct CompletenessOptions {
  int max_order = 3;
  int time_degree = 0;
  double ridge = kDefaultRidge;
  QuadSpec quad;
  RescaleMode mode = RescaleMode::SqrtPsi;
  int workers = 1;
  OracleConfig oracle;
  double z = 3.5;
  // functional -> order -> upper bound on r_m
  std::map<std::string, std::map<int, double>> thresholds;
};

struct CompletenessEntry {
  std::string functional;
  int order = 0;
  double residual_fraction = 0.0;
  double std_error = 0.0;
  std::optional<double> oracle_value;
  double oracle_bound = 0.0;
  std::optional<double> threshold;
  RowStatus status = RowStatus::Info;
};

struct CompletenessResult {
  std::vector<CompletenessEntry> entries;
  double condition_number = 0.0;
  std::size_t dropped_columns = 0;
};

// Per functional: MC residual fractions r_0..r_K of the chaos projection with
// standard errors, the exact tail where the oracle supports it, and a verdict
// (threshold if configured for that order, else agreement with the oracle
// within z standard errors plus the oracle bound, else informational).
CompletenessResult completeness_report(const Model& model, const ZetaSpec& zeta, std::span<const Path> paths,
                                       std::span<const Functional> functionals, const CompletenessOptions& options);

// CSV columns: functional,order,residual_fraction,std_error,oracle_value,pass
void write_completeness_csv(std::ostream& out, const CompletenessResult& result);

}  // namespace mppchaos
