#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mppchaos/model.hpp"
#include "mppchaos/path.hpp"

namespace mppchaos {

// Square-integrable path functional Y. Functionals in the library also carry
// a structural form used by the oracle:
//   Y = terminal(N_H, X_H) + 1{N_H >= 1} first(T_1),
// with X_H the internal model state at the horizon.
struct Functional {
  std::string name;
  std::function<double(const Model&, const Path&)> evaluate;
  std::function<double(int jumps, int state)> terminal;
  std::function<double(double first_jump)> first;  // empty when absent
  // |Y| <= growth(n) on paths with n jumps; drives truncation bounds.
  std::function<double(int jumps)> growth;

  double operator()(const Model& model, const Path& path) const { return evaluate(model, path); }
};

Functional count_functional();                    // N_H
Functional count_squared_functional();            // N_H^2
Functional exp_neg_count_functional();            // exp(-N_H)
Functional terminal_state_functional(int state);  // 1{X_H = state}
Functional first_jump_functional(double horizon);  // min(T_1, H)
Functional constant_functional(double value);

// Names: count, count_squared, exp_neg_count, terminal_state:<s>,
// first_jump_time, constant:<c>.
Functional functional_by_name(std::string_view name, double horizon);

}  // namespace mppchaos
