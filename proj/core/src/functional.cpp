#include "mppchaos/functional.hpp"

#include <cmath>
#include <stdexcept>

#include "mppchaos/error.hpp"

namespace mppchaos {

namespace {

Functional from_terminal(std::string name, std::function<double(int, int)> terminal,
                         std::function<double(int)> growth) {
  Functional f;
  f.name = std::move(name);
  f.terminal = terminal;
  f.growth = std::move(growth);
  f.evaluate = [terminal](const Model& model, const Path& path) {
    return terminal(path.size(), model.state_after(path.events));
  };
  return f;
}

double parse_number(std::string_view text, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
}

}  // namespace

Functional count_functional() {
  return from_terminal("count", [](int n, int) { return static_cast<double>(n); },
                       [](int n) { return static_cast<double>(n); });
}

Functional count_squared_functional() {
  return from_terminal("count_squared", [](int n, int) { return static_cast<double>(n) * n; },
                       [](int n) { return static_cast<double>(n) * n; });
}

Functional exp_neg_count_functional() {
  return from_terminal("exp_neg_count", [](int n, int) { return std::exp(-static_cast<double>(n)); },
                       [](int) { return 1.0; });
}

Functional terminal_state_functional(int state) {
  return from_terminal("terminal_state:" + std::to_string(state),
                       [state](int, int s) { return s == state ? 1.0 : 0.0; }, [](int) { return 1.0; });
}

Functional first_jump_functional(double horizon) {
  Functional f;
  f.name = "first_jump_time";
  f.terminal = [horizon](int n, int) { return n == 0 ? horizon : 0.0; };
  f.evaluate = [horizon](const Model&, const Path& path) {
    return path.events.empty() ? horizon : path.events.front().time;
  };
  f.first = [](double t) { return t; };
  f.growth = [horizon](int) { return horizon; };
  return f;
}

Functional constant_functional(double value) {
  auto f = from_terminal("constant:" + std::to_string(value), [value](int, int) { return value; },
                         [value](int) { return std::abs(value); });
  return f;
}

Functional functional_by_name(std::string_view name, double horizon) {
  if (name == "count") return count_functional();
  if (name == "count_squared") return count_squared_functional();
  if (name == "exp_neg_count") return exp_neg_count_functional();
  if (name == "first_jump_time") return first_jump_functional(horizon);
  const auto colon = name.find(':');
  if (colon != std::string_view::npos) {
    const auto head = name.substr(0, colon);
    const auto arg = name.substr(colon + 1);
    if (head == "terminal_state") {
      const double s = parse_number(arg, "state");
      if (s < 0 || s != std::floor(s)) throw Error(ErrorCode::ConfigError, "state index must be a natural number");
      return terminal_state_functional(static_cast<int>(s));
    }
    if (head == "constant") {
      auto f = constant_functional(parse_number(arg, "constant"));
      f.name = std::string(name);
      return f;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown functional '" + std::string(name) + "'");
}

}  // namespace mppchaos
