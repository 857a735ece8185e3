#include "mppchaos/config.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "mppchaos/error.hpp"

namespace mppchaos {

using nlohmann::json;

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"martingale",  "isometry", "orthogonality", "completeness",
                                                 "oracle-check", "boundary", "telescoping"};
  return names;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) fail("unknown key '" + where + "." + item.key() + "'");
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail("'" + where + "." + key + "' has the wrong type");
  }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail("missing '" + where + "." + key + "'");
  return get<T>(obj, key, where, T{});
}

std::vector<std::string> default_labels(int n) {
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return labels;
}

HazardFamily parse_hazard(const json& h) {
  allow_keys(h, "model.hazard", {"family", "a", "b", "p"});
  HazardFamily out;
  const auto family = require<std::string>(h, "family", "model.hazard");
  if (family == "constant") {
    out.kind = HazardFamily::Kind::Constant;
  } else if (family == "linear") {
    out.kind = HazardFamily::Kind::Linear;
  } else if (family == "exponential") {
    out.kind = HazardFamily::Kind::Exponential;
  } else if (family == "power") {
    out.kind = HazardFamily::Kind::Power;
  } else {
    fail("unknown hazard family '" + family + "'");
  }
  out.a = get<double>(h, "a", "model.hazard", 1.0);
  out.b = get<double>(h, "b", "model.hazard", 0.0);
  out.p = get<double>(h, "p", "model.hazard", 1.0);
  return out;
}

ModelSpec parse_model(const json& m) {
  allow_keys(m, "model", {"kind", "horizon", "representation", "labels", "group", "rate", "mark_dist",
                          "generator", "initial_state", "hazard", "kernel", "initial_mark"});
  ModelSpec spec;
  spec.horizon = get<double>(m, "horizon", "model", 1.0);
  const auto rep = get<std::string>(m, "representation", "model", "state_after_jump");
  if (rep == "state_after_jump") {
    spec.representation = Representation::StateAfterJump;
  } else if (rep == "jump_increment") {
    spec.representation = Representation::JumpIncrement;
  } else {
    fail("unknown representation '" + rep + "'");
  }

  const auto kind = require<std::string>(m, "kind", "model");
  int n = 0;
  if (kind == "poisson") {
    MarkedPoisson p;
    p.rate = require<double>(m, "rate", "model");
    p.mark_dist = get<std::vector<double>>(m, "mark_dist", "model", {1.0});
    n = static_cast<int>(p.mark_dist.size());
    spec.kind = p;
  } else if (kind == "ctmc") {
    Ctmc c;
    c.generator = require<std::vector<std::vector<double>>>(m, "generator", "model");
    c.initial_state = get<int>(m, "initial_state", "model", 0);
    n = static_cast<int>(c.generator.size());
    spec.kind = c;
  } else if (kind == "renewal") {
    Renewal r;
    if (!m.contains("hazard")) fail("missing 'model.hazard'");
    r.hazard = parse_hazard(m.at("hazard"));
    r.kernel = require<std::vector<std::vector<double>>>(m, "kernel", "model");
    r.initial_mark = get<int>(m, "initial_mark", "model", 0);
    n = static_cast<int>(r.kernel.size());
    spec.kind = r;
  } else {
    fail("unknown model kind '" + kind + "'");
  }

  spec.marks.labels = get<std::vector<std::string>>(m, "labels", "model", default_labels(n));
  if (static_cast<int>(spec.marks.labels.size()) != n) fail("model.labels needs one label per mark");
  if (m.contains("group")) {
    const auto& g = m.at("group");
    if (g.is_string()) {
      if (g.get<std::string>() != "cyclic") fail("model.group must be \"cyclic\" or an addition table");
      spec.marks.addition = MarkSpace::cyclic(n).addition;
    } else {
      spec.marks.addition = get<std::vector<std::vector<int>>>(m, "group", "model", {});
    }
  }
  return spec;
}

ZetaSpec parse_zeta(const json& z) {
  allow_keys(z, "zeta", {"time_density", "scale", "mark_reference", "overrides"});
  ZetaSpec out;
  if (z.contains("time_density")) {
    const auto& d = z.at("time_density");
    allow_keys(d, "zeta.time_density", {"family", "a", "b"});
    const auto family = get<std::string>(d, "family", "zeta.time_density", "constant");
    if (family == "constant") {
      out.density.kind = TimeDensity::Kind::Constant;
    } else if (family == "linear") {
      out.density.kind = TimeDensity::Kind::Linear;
    } else if (family == "exponential") {
      out.density.kind = TimeDensity::Kind::Exponential;
    } else {
      fail("unknown time density family '" + family + "'");
    }
    out.density.a = get<double>(d, "a", "zeta.time_density", 1.0);
    out.density.b = get<double>(d, "b", "zeta.time_density", 0.0);
  }
  out.scale = get<double>(z, "scale", "zeta", 1.0);
  if (z.contains("mark_reference")) {
    const auto& r = z.at("mark_reference");
    if (r.is_string()) {
      if (r.get<std::string>() != "support") fail("zeta.mark_reference must be \"support\" or a weight list");
    } else {
      out.mark_reference = ZetaSpec::MarkReference::Explicit;
      out.mark_weights = get<std::vector<double>>(z, "mark_reference", "zeta", {});
    }
  }
  if (z.contains("overrides")) {
    const auto& o = z.at("overrides");
    if (!o.is_object()) fail("zeta.overrides must map jump indices to weight lists");
    for (const auto& item : o.items()) {
      int alpha = 0;
      try {
        std::size_t used = 0;
        alpha = std::stoi(item.key(), &used);
        if (used != item.key().size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        fail("zeta.overrides key '" + item.key() + "' is not a jump index");
      }
      try {
        out.overrides[alpha] = item.value().get<std::vector<double>>();
      } catch (const json::exception&) {
        fail("zeta.overrides." + item.key() + " must be a weight list");
      }
    }
  }
  return out;
}

SuiteConfig from_json(const json& root) {
  allow_keys(root, "config", {"name", "model", "zeta", "sim", "quad", "mode", "chaos", "oracle", "suites",
                              "tolerance", "output"});
  SuiteConfig cfg;
  cfg.name = get<std::string>(root, "name", "config", "unnamed");
  if (!root.contains("model")) fail("missing 'model' block");
  cfg.model = parse_model(root.at("model"));
  if (root.contains("zeta")) cfg.zeta = parse_zeta(root.at("zeta"));

  if (!root.contains("sim")) fail("missing 'sim' block (sim.seed is required)");
  const auto& sim = root.at("sim");
  allow_keys(sim, "sim", {"paths", "seed", "workers", "jump_cap"});
  if (!sim.contains("seed")) fail("missing 'sim.seed'; runs are never seeded from the clock");
  cfg.sim.seed = require<std::uint64_t>(sim, "seed", "sim");
  cfg.sim.paths = get<std::size_t>(sim, "paths", "sim", cfg.sim.paths);
  cfg.sim.workers = get<int>(sim, "workers", "sim", cfg.sim.workers);
  cfg.sim.jump_cap = get<std::size_t>(sim, "jump_cap", "sim", cfg.sim.jump_cap);
  if (cfg.sim.paths < 2) fail("sim.paths must be at least 2");

  if (root.contains("quad")) {
    allow_keys(root.at("quad"), "quad", {"nodes"});
    cfg.quad.nodes = get<int>(root.at("quad"), "nodes", "quad", cfg.quad.nodes);
  }
  if (root.contains("mode")) {
    allow_keys(root.at("mode"), "mode", {"rescale"});
    cfg.mode = parse_rescale_mode(get<std::string>(root.at("mode"), "rescale", "mode", "sqrt_psi"));
  }
  if (root.contains("chaos")) {
    const auto& c = root.at("chaos");
    allow_keys(c, "chaos", {"max_order", "time_degree", "ridge", "functionals", "thresholds", "strictly_decreasing"});
    cfg.chaos.max_order = get<int>(c, "max_order", "chaos", cfg.chaos.max_order);
    cfg.chaos.time_degree = get<int>(c, "time_degree", "chaos", cfg.chaos.time_degree);
    cfg.chaos.ridge = get<double>(c, "ridge", "chaos", cfg.chaos.ridge);
    cfg.chaos.functionals = get<std::vector<std::string>>(c, "functionals", "chaos", {});
    cfg.chaos.strictly_decreasing = get<std::vector<std::string>>(c, "strictly_decreasing", "chaos", {});
    if (c.contains("thresholds")) {
      const auto& t = c.at("thresholds");
      if (!t.is_object()) fail("chaos.thresholds must be an object");
      for (const auto& f : t.items()) {
        if (!f.value().is_object()) fail("chaos.thresholds." + f.key() + " must map orders to bounds");
        for (const auto& o : f.value().items()) {
          int order = 0;
          try {
            order = std::stoi(o.key());
          } catch (const std::exception&) {
            fail("chaos.thresholds." + f.key() + " key '" + o.key() + "' is not an order");
          }
          if (!o.value().is_number()) fail("chaos.thresholds." + f.key() + "." + o.key() + " must be a number");
          cfg.chaos.thresholds[f.key()][order] = o.value().get<double>();
        }
      }
    }
  }
  if (root.contains("oracle")) {
    const auto& o = root.at("oracle");
    allow_keys(o, "oracle", {"n_max", "quad_nodes", "tolerance", "ode_steps"});
    cfg.oracle.n_max = get<int>(o, "n_max", "oracle", cfg.oracle.n_max);
    cfg.oracle.quad_nodes = get<int>(o, "quad_nodes", "oracle", cfg.oracle.quad_nodes);
    cfg.oracle.tolerance = get<double>(o, "tolerance", "oracle", cfg.oracle.tolerance);
    cfg.oracle.ode_steps = get<int>(o, "ode_steps", "oracle", cfg.oracle.ode_steps);
  }
  if (root.contains("suites")) {
    const auto& s = root.at("suites");
    if (s.is_string() && s.get<std::string>() == "all") {
      cfg.suites = suite_names();
    } else {
      cfg.suites = get<std::vector<std::string>>(root, "suites", "config", {});
    }
  } else {
    cfg.suites = suite_names();
  }
  for (const auto& s : cfg.suites) {
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end()) {
      fail("unknown suite '" + s + "'");
    }
  }
  if (root.contains("tolerance")) {
    const auto& t = root.at("tolerance");
    allow_keys(t, "tolerance", {"z", "exact"});
    cfg.tolerance.z = get<double>(t, "z", "tolerance", cfg.tolerance.z);
    cfg.tolerance.exact = get<double>(t, "exact", "tolerance", cfg.tolerance.exact);
  }
  if (root.contains("output")) {
    const auto& o = root.at("output");
    allow_keys(o, "output", {"csv", "json", "paths"});
    cfg.output.csv = get<std::string>(o, "csv", "output", "");
    cfg.output.json = get<std::string>(o, "json", "output", "");
    cfg.output.paths = get<std::string>(o, "paths", "output", "");
  }
  return cfg;
}

}  // namespace

SuiteConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(root);
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace mppchaos
