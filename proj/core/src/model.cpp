#include "mppchaos/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "mppchaos/error.hpp"

namespace mppchaos {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(double x) { return std::isfinite(x); }

void check_distribution(std::span<const double> dist, int size, const std::string& what) {
  if (static_cast<int>(dist.size()) != size) {
    throw Error(ErrorCode::InvalidKernel, what + " has " + std::to_string(dist.size()) +
                                              " entries, expected " + std::to_string(size));
  }
  double sum = 0.0;
  for (double p : dist) {
    if (!finite(p) || p < 0.0) throw Error(ErrorCode::InvalidKernel, what + " has a negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os << what << " sums to " << sum << ", expected 1";
    throw Error(ErrorCode::InvalidKernel, os.str());
  }
}

void check_hazard(const HazardFamily& h, double horizon) {
  using K = HazardFamily::Kind;
  if (!finite(h.a) || !finite(h.b) || !finite(h.p)) {
    throw Error(ErrorCode::InvalidRates, "hazard parameters must be finite");
  }
  bool ok = h.a > 0.0;
  switch (h.kind) {
    case K::Constant: break;
    case K::Linear: ok = ok && h.a + h.b * horizon > 0.0; break;
    case K::Exponential: break;
    case K::Power: ok = ok && h.b >= 0.0 && h.p > 0.0; break;
  }
  if (!ok) throw Error(ErrorCode::InvalidRates, "hazard must be strictly positive on [0, horizon]");
}

std::string describe_marks(std::span<const int> marks) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < marks.size(); ++i) os << (i ? "," : "") << marks[i];
  os << '}';
  return os.str();
}

}  // namespace

MarkSpace MarkSpace::plain(int n) {
  MarkSpace m;
  for (int i = 0; i < n; ++i) m.labels.push_back(std::to_string(i));
  return m;
}

MarkSpace MarkSpace::cyclic(int n) {
  MarkSpace m = plain(n);
  std::vector<std::vector<int>> table(n, std::vector<int>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) table[a][b] = (a + b) % n;
  m.addition = std::move(table);
  return m;
}

int MarkSpace::find(std::string_view label) const {
  for (int i = 0; i < size(); ++i)
    if (labels[i] == label) return i;
  return -1;
}

void check_mark_space(const MarkSpace& marks) {
  const int n = marks.size();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "mark space must have at least one label");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (marks.labels[i] == marks.labels[j]) {
        throw Error(ErrorCode::InvalidArgument, "duplicate mark label '" + marks.labels[i] + "'");
      }
  if (!marks.addition) return;

  const auto& t = *marks.addition;
  if (static_cast<int>(t.size()) != n) throw Error(ErrorCode::InvalidArgument, "addition table has wrong size");
  for (const auto& row : t) {
    if (static_cast<int>(row.size()) != n) throw Error(ErrorCode::InvalidArgument, "addition table has wrong size");
    for (int v : row)
      if (v < 0 || v >= n) throw Error(ErrorCode::InvalidArgument, "addition table is not closed");
  }
  int identity = -1;
  for (int e = 0; e < n && identity < 0; ++e) {
    bool is_identity = true;
    for (int a = 0; a < n; ++a) is_identity = is_identity && t[e][a] == a && t[a][e] == a;
    if (is_identity) identity = e;
  }
  if (identity < 0) throw Error(ErrorCode::InvalidArgument, "addition table has no identity");
  for (int a = 0; a < n; ++a) {
    bool has_inverse = false;
    for (int b = 0; b < n; ++b) has_inverse = has_inverse || (t[a][b] == identity && t[b][a] == identity);
    if (!has_inverse) throw Error(ErrorCode::InvalidArgument, "label '" + marks.labels[a] + "' has no inverse");
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (t[t[a][b]][c] != t[a][t[b][c]]) throw Error(ErrorCode::InvalidArgument, "addition table is not associative");
}

double HazardFamily::rate(double u) const {
  switch (kind) {
    case Kind::Constant: return a;
    case Kind::Linear: return a + b * u;
    case Kind::Exponential: return a * std::exp(b * u);
    case Kind::Power: return a + b * std::pow(u, p);
  }
  return a;
}

double HazardFamily::integrated(double u) const {
  switch (kind) {
    case Kind::Constant: return a * u;
    case Kind::Linear: return a * u + 0.5 * b * u * u;
    case Kind::Exponential: return b == 0.0 ? a * u : a * std::expm1(b * u) / b;
    case Kind::Power: return a * u + b * std::pow(u, p + 1.0) / (p + 1.0);
  }
  return a * u;
}

std::optional<double> HazardFamily::inverse(double target) const {
  switch (kind) {
    case Kind::Constant: return target / a;
    case Kind::Linear: {
      if (b == 0.0) return target / a;
      const double disc = a * a + 2.0 * b * target;
      if (disc < 0.0) return kInf;
      return 2.0 * target / (a + std::sqrt(disc));
    }
    case Kind::Exponential: {
      if (b == 0.0) return target / a;
      const double arg = b * target / a;
      if (arg <= -1.0) return kInf;
      return std::log1p(arg) / b;
    }
    case Kind::Power: return std::nullopt;
  }
  return std::nullopt;
}

double TimeDensity::operator()(double t) const {
  switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::Linear: return a + b * t;
    case Kind::Exponential: return std::exp(b * t);
  }
  return 1.0;
}

std::vector<double> ZetaSpec::mark_measure(int jump_index, std::span<const int> support,
                                           int num_marks) const {
  if (auto it = overrides.find(jump_index); it != overrides.end()) return it->second;
  if (mark_reference == MarkReference::Explicit) return mark_weights;
  std::vector<double> nu(num_marks, 0.0);
  for (int x : support) nu[x] = 1.0 / static_cast<double>(support.size());
  return nu;
}

class ModelBuilder {
 public:
  static Model build(const ModelSpec& spec);
  static void analyse_support(Model& m);
};

Model ModelBuilder::build(const ModelSpec& input) {
  Model m;
  m.spec_ = input;
  ModelSpec& spec = m.spec_;
  check_mark_space(spec.marks);
  if (!finite(spec.horizon) || spec.horizon <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "horizon must be positive and finite");
  }
  const int n = spec.marks.size();
  const bool increments = spec.representation == Representation::JumpIncrement;
  if (increments && !spec.marks.addition && !std::holds_alternative<MarkedPoisson>(spec.kind)) {
    spec.marks.addition = MarkSpace::cyclic(n).addition;
  }

  if (const auto* poisson = std::get_if<MarkedPoisson>(&spec.kind)) {
    if (!finite(poisson->rate) || poisson->rate <= 0.0) {
      throw Error(ErrorCode::InvalidRates, "Poisson rate must be positive and finite");
    }
    check_distribution(poisson->mark_dist, n, "mark distribution");
    m.num_states_ = 1;
    m.initial_state_ = 0;
    m.transition_ = poisson->mark_dist;
    m.next_.assign(n, 0);
  } else if (const auto* ctmc = std::get_if<Ctmc>(&spec.kind)) {
    const auto& q = ctmc->generator;
    if (static_cast<int>(q.size()) != n) throw Error(ErrorCode::InvalidRates, "generator must be |E| x |E|");
    for (int s = 0; s < n; ++s) {
      if (static_cast<int>(q[s].size()) != n) throw Error(ErrorCode::InvalidRates, "generator must be |E| x |E|");
      double row = 0.0, exit = 0.0;
      for (int x = 0; x < n; ++x) {
        if (!finite(q[s][x])) throw Error(ErrorCode::InvalidRates, "generator entries must be finite");
        if (x != s && q[s][x] < 0.0) throw Error(ErrorCode::InvalidRates, "negative off-diagonal generator entry");
        row += q[s][x];
        if (x != s) exit += q[s][x];
      }
      if (exit <= 0.0) {
        throw Error(ErrorCode::InvalidRates, "state " + std::to_string(s) + " has zero exit rate");
      }
      if (std::abs(row) > kSumTolerance * std::max(1.0, exit)) {
        throw Error(ErrorCode::InvalidRates, "generator row " + std::to_string(s) + " does not sum to 0");
      }
    }
    if (ctmc->initial_state < 0 || ctmc->initial_state >= n) {
      throw Error(ErrorCode::InvalidArgument, "initial state out of range");
    }
    m.num_states_ = n;
    m.initial_state_ = ctmc->initial_state;
    m.transition_.assign(static_cast<std::size_t>(n) * n, 0.0);
    m.next_.assign(static_cast<std::size_t>(n) * n, 0);
    for (int s = 0; s < n; ++s) {
      const double exit = -q[s][s];
      for (int x = 0; x < n; ++x) {
        const int target = increments ? (*spec.marks.addition)[s][x] : x;
        m.next_[s * n + x] = target;
        m.transition_[s * n + x] = target == s ? 0.0 : q[s][target] / exit;
      }
    }
  } else {
    const auto& renewal = std::get<Renewal>(spec.kind);
    check_hazard(renewal.hazard, spec.horizon);
    if (static_cast<int>(renewal.kernel.size()) != n) throw Error(ErrorCode::InvalidKernel, "kernel must be |E| x |E|");
    for (int s = 0; s < n; ++s) check_distribution(renewal.kernel[s], n, "kernel row " + std::to_string(s));
    if (renewal.initial_mark < 0 || renewal.initial_mark >= n) {
      throw Error(ErrorCode::InvalidArgument, "initial mark out of range");
    }
    m.num_states_ = n;
    m.initial_state_ = renewal.initial_mark;
    m.transition_.assign(static_cast<std::size_t>(n) * n, 0.0);
    m.next_.assign(static_cast<std::size_t>(n) * n, 0);
    for (int s = 0; s < n; ++s)
      for (int x = 0; x < n; ++x) {
        const int target = increments ? (*spec.marks.addition)[s][x] : x;
        m.next_[s * n + x] = target;
        m.transition_[s * n + x] = renewal.kernel[s][target];
      }
  }
  analyse_support(m);
  return m;
}

void ModelBuilder::analyse_support(Model& m) {
  const int n = m.num_marks();
  std::map<std::vector<int>, int> seen;
  std::vector<int> current{m.initial_state_};
  constexpr int kMaxSequence = 1 << 16;
  for (int k = 0; k < kMaxSequence; ++k) {
    if (auto it = seen.find(current); it != seen.end()) {
      m.cycle_start_ = it->second;
      m.cycle_length_ = k - it->second;
      break;
    }
    seen.emplace(current, k);
    m.reachable_.push_back(current);

    std::vector<int> support;
    std::string failure;
    bool agree = true;
    for (std::size_t i = 0; i < current.size(); ++i) {
      std::vector<int> marks;
      for (int x = 0; x < n; ++x)
        if (m.transition(current[i], x) > 0.0) marks.push_back(x);
      if (i == 0) {
        support = marks;
      } else if (marks != support) {
        agree = false;
        if (failure.empty()) {
          failure = "jump " + std::to_string(k + 1) + ": state " + std::to_string(current[0]) +
                               " allows " + describe_marks(support) + " but state " +
                               std::to_string(current[i]) + " allows " + describe_marks(marks);
        }
      }
    }
    if (!agree) {
      m.support_deterministic_ = false;
      support.clear();
    }
    m.support_ok_.push_back(agree);
    m.support_failure_.push_back(failure);
    m.support_.push_back(support);

    std::vector<char> next(m.num_states_, 0);
    for (int s : current)
      for (int x = 0; x < n; ++x)
        if (m.transition(s, x) > 0.0) next[m.next_state(s, x)] = 1;
    current.clear();
    for (int s = 0; s < m.num_states_; ++s)
      if (next[s]) current.push_back(s);
  }
}

bool Model::is_markov() const {
  if (const auto* r = std::get_if<Renewal>(&spec_.kind)) return r->hazard.kind == HazardFamily::Kind::Constant;
  return true;
}

double Model::state_hazard(int state, double elapsed) const {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MarkedPoisson>) return k.rate;
        else if constexpr (std::is_same_v<T, Ctmc>) return -k.generator[state][state];
        else return k.hazard.rate(elapsed);
      },
      spec_.kind);
}

double Model::state_integrated_hazard(int state, double elapsed) const {
  if (const auto* r = std::get_if<Renewal>(&spec_.kind)) return r->hazard.integrated(elapsed);
  return state_hazard(state, 0.0) * elapsed;
}

std::optional<double> Model::state_inverse_hazard(int state, double target) const {
  if (const auto* r = std::get_if<Renewal>(&spec_.kind)) return r->hazard.inverse(target);
  return target / state_hazard(state, 0.0);
}

double Model::hazard_bound() const {
  if (const auto* r = std::get_if<Renewal>(&spec_.kind)) {
    return std::max(r->hazard.rate(0.0), r->hazard.rate(spec_.horizon));
  }
  double bound = 0.0;
  for (int s = 0; s < num_states_; ++s) bound = std::max(bound, state_hazard(s, 0.0));
  return bound;
}

int Model::state_after(std::span<const Jump> jumps) const {
  int s = initial_state_;
  for (const auto& j : jumps) s = next_state(s, j.mark);
  return s;
}

int Model::sequence_index(int jumps) const {
  if (jumps < static_cast<int>(reachable_.size())) return jumps;
  return cycle_start_ + (jumps - cycle_start_) % cycle_length_;
}

const std::vector<int>& Model::reachable(int jumps) const { return reachable_[sequence_index(jumps)]; }

const std::vector<int>& Model::support(int jump_index) const {
  if (jump_index < 1) throw Error(ErrorCode::InvalidArgument, "jump index is 1-based");
  const int k = sequence_index(jump_index - 1);
  if (!support_ok_[k]) throw Error(ErrorCode::StochasticSupport, support_failure_[k]);
  return support_[k];
}

void Model::check_time(const History& history, double t) const {
  const double last = history.jumps.empty() ? 0.0 : history.jumps.back().time;
  if (!(t <= spec_.horizon) || !(t > last)) {
    std::ostringstream os;
    os << "time " << t << " outside (" << last << ", " << spec_.horizon << "]";
    throw Error(ErrorCode::OutOfHorizon, os.str());
  }
}

double Model::hazard(const History& history, double t) const {
  check_time(history, t);
  const double last = history.jumps.empty() ? 0.0 : history.jumps.back().time;
  return state_hazard(state_after(history.jumps), t - last);
}

std::vector<double> Model::mark_kernel(const History& history, double t) const {
  check_time(history, t);
  const int s = state_after(history.jumps);
  std::vector<double> out(num_marks());
  for (int x = 0; x < num_marks(); ++x) out[x] = transition(s, x);
  return out;
}

double Model::survival(const History& history, double t) const {
  const double last = history.jumps.empty() ? 0.0 : history.jumps.back().time;
  if (t < last) throw Error(ErrorCode::OutOfHorizon, "survival requested before the last jump");
  if (t == last) return 1.0;
  return std::exp(-state_integrated_hazard(state_after(history.jumps), t - last));
}

std::vector<int> support_marks(const ModelSpec& spec, int jump_index) {
  return ModelBuilder::build(spec).support(jump_index);
}

Model validate_model(const ModelSpec& spec, const ZetaSpec& zeta) {
  Model m = ModelBuilder::build(spec);
  const int n = m.num_marks();

  if (!finite(zeta.scale) || zeta.scale <= 0.0) throw Error(ErrorCode::InvalidArgument, "zeta scale must be positive");
  if (!(zeta.time_weight(0.0) > 0.0) || !(zeta.time_weight(spec.horizon) > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "zeta time density must be positive on [0, horizon]");
  }
  const auto check_weights = [n](const std::vector<double>& w) {
    if (static_cast<int>(w.size()) != n) throw Error(ErrorCode::InvalidArgument, "mark reference weights need one entry per label");
    for (double v : w)
      if (!finite(v) || v < 0.0) throw Error(ErrorCode::InvalidArgument, "mark reference weights must be nonnegative");
  };
  if (zeta.mark_reference == ZetaSpec::MarkReference::Explicit) check_weights(zeta.mark_weights);
  for (const auto& [alpha, w] : zeta.overrides) {
    if (alpha < 1) throw Error(ErrorCode::InvalidArgument, "zeta overrides are indexed from jump 1");
    check_weights(w);
  }

  std::vector<int> jump_indices;
  for (int k = 0; k < m.sequence_length(); ++k) jump_indices.push_back(k + 1);
  for (const auto& [alpha, w] : zeta.overrides) jump_indices.push_back(alpha);

  std::vector<std::string> mismatches;
  for (int alpha : jump_indices) {
    std::vector<int> support;
    if (zeta.mark_reference == ZetaSpec::MarkReference::UniformOnSupport && !zeta.overrides.count(alpha)) {
      support = m.support(alpha);
    }
    const auto nu = zeta.mark_measure(alpha, support, n);
    for (int s : m.reachable(alpha - 1)) {
      for (int x = 0; x < n; ++x) {
        const bool kernel_positive = m.transition(s, x) > 0.0;
        const bool reference_positive = nu[x] > 0.0;
        if (kernel_positive != reference_positive) {
          std::ostringstream os;
          os << "(state " << s << " -> mark " << spec.marks.labels[x] << ", jump " << alpha << ": "
             << (reference_positive ? "zeta positive, compensator zero" : "compensator positive, zeta zero") << ")";
          mismatches.push_back(os.str());
        }
      }
    }
  }
  if (!mismatches.empty()) {
    std::ostringstream os;
    os << "reference measure not equivalent to the compensator at ";
    const std::size_t shown = std::min<std::size_t>(mismatches.size(), 8);
    for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << mismatches[i];
    if (mismatches.size() > shown) os << ", ... (" << mismatches.size() << " total)";
    throw Error(ErrorCode::SupportMismatch, os.str());
  }
  return m;
}

}  // namespace mppchaos
