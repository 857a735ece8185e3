#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mppchaos/martingale.hpp"
#include "mppchaos/model.hpp"
#include "mppchaos/oracle.hpp"
#include "mppchaos/path.hpp"
#include "mppchaos/zeta.hpp"

namespace mppchaos {

struct SimConfig {
  std::size_t paths = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  std::size_t jump_cap = kDefaultJumpCap;
};

struct ChaosConfig {
  int max_order = 3;
  int time_degree = 0;
  double ridge = 1e-8;
  std::vector<std::string> functionals;
  // functional -> order -> upper bound on the residual fraction
  std::map<std::string, std::map<int, double>> thresholds;
  std::vector<std::string> strictly_decreasing;
};

struct TolerancePolicy {
  double z = 3.5;        // two-sided statistical threshold in standard errors
  double exact = 1e-9;   // absolute tolerance of per-path identities
};

struct OutputConfig {
  std::string csv;
  std::string json;
  std::string paths;
};

struct SuiteConfig {
  std::string name = "unnamed";
  ModelSpec model;
  ZetaSpec zeta;
  SimConfig sim;
  QuadSpec quad;
  RescaleMode mode = RescaleMode::SqrtPsi;
  ChaosConfig chaos;
  OracleConfig oracle;
  std::vector<std::string> suites;
  TolerancePolicy tolerance;
  OutputConfig output;
};

const std::vector<std::string>& suite_names();

// JSON text / file to a checked configuration; unknown keys, missing
// sim.seed and unknown suites raise ConfigError.
SuiteConfig parse_config(std::string_view json_text);
SuiteConfig load_config(const std::string& path);

}  // namespace mppchaos
