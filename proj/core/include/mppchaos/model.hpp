#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mppchaos/zeta.hpp"

namespace mppchaos {

// Finite mark space E, optionally carrying a group law used by the
// jump-increment representation.
struct MarkSpace {
  std::vector<std::string> labels;
  // addition[a][b] = index of labels[a] + labels[b].
  std::optional<std::vector<std::vector<int>>> addition;

  int size() const { return static_cast<int>(labels.size()); }

  // Z_n with labels "0".."n-1" and addition mod n.
  static MarkSpace cyclic(int n);
  // Labels "0".."n-1" without a group law.
  static MarkSpace plain(int n);

  int find(std::string_view label) const;  // -1 if absent
};

// Checks label uniqueness and, if present, the group axioms of the table.
void check_mark_space(const MarkSpace& marks);

// Elapsed-time hazard families with closed-form integrated hazard.
struct HazardFamily {
  enum class Kind {
    Constant,     // a
    Linear,       // a + b u
    Exponential,  // a exp(b u)
    Power,        // a + b u^p  (no closed-form inverse; sampled by bisection)
  };
  Kind kind = Kind::Constant;
  double a = 1.0;
  double b = 0.0;
  double p = 1.0;

  double rate(double elapsed) const;
  double integrated(double elapsed) const;
  // Elapsed time u with integrated(u) == target, when available in closed form.
  std::optional<double> inverse(double target) const;
};

enum class Representation { StateAfterJump, JumpIncrement };

struct MarkedPoisson {
  double rate = 1.0;
  std::vector<double> mark_dist;
};

struct Ctmc {
  std::vector<std::vector<double>> generator;
  int initial_state = 0;
};

struct Renewal {
  HazardFamily hazard;
  // kernel[previous label][next label]
  std::vector<std::vector<double>> kernel;
  int initial_mark = 0;
};

struct ModelSpec {
  MarkSpace marks;
  std::variant<MarkedPoisson, Ctmc, Renewal> kind;
  Representation representation = Representation::StateAfterJump;
  double horizon = 1.0;
};

struct Jump {
  double time = 0.0;
  int mark = 0;

  friend bool operator==(const Jump&, const Jump&) = default;
};

// Jumps strictly before `now`.
struct History {
  std::vector<Jump> jumps;
  double now = 0.0;
};

// Immutable, validated model. The per-jump law is expressed through an
// internal state (the current CTMC state or last renewal label; a single
// dummy state for marked Poisson):
//   hazard       h_s(u), u = time since last jump
//   transition   K(s, x) = P(mark x | state s)
//   next state   s' = next(s, x)
class Model {
 public:
  const ModelSpec& spec() const { return spec_; }
  double horizon() const { return spec_.horizon; }
  int num_marks() const { return spec_.marks.size(); }
  int num_states() const { return num_states_; }
  int initial_state() const { return initial_state_; }
  // True when the hazard does not depend on elapsed time.
  bool is_markov() const;

  double state_hazard(int state, double elapsed) const;
  double state_integrated_hazard(int state, double elapsed) const;
  std::optional<double> state_inverse_hazard(int state, double target) const;
  double transition(int state, int mark) const { return transition_[state * num_marks() + mark]; }
  int next_state(int state, int mark) const { return next_[state * num_marks() + mark]; }
  // Upper bound on the hazard over elapsed times in [0, horizon].
  double hazard_bound() const;

  // Internal state after replaying the given jumps from the initial state.
  int state_after(std::span<const Jump> jumps) const;

  // Deterministic set of marks with positive rate at jump alpha (1-based).
  const std::vector<int>& support(int jump_index) const;
  // Internal states reachable after exactly `jumps` jumps.
  const std::vector<int>& reachable(int jumps) const;
  // Position of `jumps` in the eventually periodic reachable-set sequence;
  // equal positions share reachable sets and supports.
  int sequence_index(int jumps) const;
  int sequence_length() const { return static_cast<int>(reachable_.size()); }

  // History-facing operations.
  double hazard(const History& history, double t) const;
  std::vector<double> mark_kernel(const History& history, double t) const;
  double survival(const History& history, double t) const;

 private:
  friend class ModelBuilder;
  Model() = default;

  ModelSpec spec_;
  int num_states_ = 1;
  int initial_state_ = 0;
  std::vector<double> transition_;
  std::vector<int> next_;
  // Reachable-set sequence R_0, R_1, ... with eventual period.
  std::vector<std::vector<int>> reachable_;
  std::vector<std::vector<int>> support_;  // support_[k] = support at jump k+1
  int cycle_start_ = 0;
  int cycle_length_ = 1;
  std::vector<char> support_ok_;
  bool support_deterministic_ = true;
  std::vector<std::string> support_failure_;

  void check_time(const History& history, double t) const;
};

// Checks the model invariants and the compatibility of the reference mark
// measure with the compensator support. Throws Error on failure.
Model validate_model(const ModelSpec& spec, const ZetaSpec& zeta = {});

// Deterministic support of jump alpha (1-based). Throws StochasticSupport
// when the positive-rate mark set depends on the history.
std::vector<int> support_marks(const ModelSpec& spec, int jump_index);

}  // namespace mppchaos
