#include "mppchaos/martingale.hpp"

#include <cmath>
#include <sstream>

#include "mppchaos/error.hpp"

namespace mppchaos {

const char* to_string(RescaleMode mode) {
  switch (mode) {
    case RescaleMode::SqrtPsi: return "sqrt_psi";
    case RescaleMode::Psi: return "psi";
    case RescaleMode::None: return "none";
  }
  return "sqrt_psi";
}

RescaleMode parse_rescale_mode(std::string_view text) {
  if (text == "sqrt_psi") return RescaleMode::SqrtPsi;
  if (text == "psi") return RescaleMode::Psi;
  if (text == "none") return RescaleMode::None;
  throw Error(ErrorCode::ConfigError, "unknown rescale mode '" + std::string(text) + "'");
}

ReferenceMeasure::ReferenceMeasure(const Model& model, const ZetaSpec& zeta) : model_(&model), zeta_(zeta) {
  const bool uniform = zeta.mark_reference == ZetaSpec::MarkReference::UniformOnSupport;
  ZetaSpec base = zeta;
  base.overrides.clear();
  for (int k = 0; k < model.sequence_length(); ++k) {
    std::vector<int> support;
    if (uniform) support = model.support(k + 1);
    by_sequence_.push_back(base.mark_measure(k + 1, support, model.num_marks()));
  }
  for (const auto& entry : zeta.overrides) overrides_.push_back(entry);
}

const std::vector<double>& ReferenceMeasure::marks(int jump_index) const {
  for (const auto& [alpha, nu] : overrides_)
    if (alpha == jump_index) return nu;
  return by_sequence_[model_->sequence_index(jump_index - 1)];
}

std::vector<Cell> MeasureNodes::cells() const {
  std::vector<Cell> out;
  for (const auto& seg : segments)
    for (std::size_t j = 0; j < seg.times.size(); ++j)
      for (int x = 0; x < num_marks; ++x) {
        const double w = seg.cell(static_cast<int>(j), x, num_marks);
        if (w != 0.0) out.push_back({seg.times[j], x, w});
      }
  return out;
}

std::size_t MeasureNodes::node_count() const {
  std::size_t count = atoms.size();
  for (const auto& seg : segments) count += seg.times.size() * static_cast<std::size_t>(num_marks);
  return count;
}

double MeasureNodes::total_atom_mass() const {
  double sum = 0.0;
  for (const auto& a : atoms) sum += a.weight;
  return sum;
}

double MeasureNodes::total_cell_mass() const {
  double sum = 0.0;
  for (const auto& seg : segments)
    for (double c : seg.cells) sum += c;
  return sum;
}

double compensator_density(const Model& model, const Path& path, double t, int x) {
  const auto prior = path.before(t);
  const int state = model.state_after(prior);
  const double last = prior.empty() ? 0.0 : prior.back().time;
  const double kernel = model.transition(state, x);
  if (kernel == 0.0) return 0.0;
  return model.state_hazard(state, t - last) * kernel;
}

double psi(const Model& model, const ZetaSpec& zeta, const Path& path, double t, int x) {
  const double rho = compensator_density(model, path, t, x);
  if (!(rho > 0.0)) {
    std::ostringstream os;
    os << "compensator density vanishes at (t=" << t << ", mark " << x << ")";
    throw Error(ErrorCode::ZeroCompensator, os.str());
  }
  const int alpha = static_cast<int>(path.before(t).size()) + 1;
  std::vector<int> support;
  if (zeta.mark_reference == ZetaSpec::MarkReference::UniformOnSupport && !zeta.overrides.count(alpha)) {
    support = model.support(alpha);
  }
  const auto nu = zeta.mark_measure(alpha, support, model.num_marks());
  const double value = zeta.time_weight(t) * nu[x] / rho;
  if (value > 1.0) {
    std::ostringstream os;
    os << "psi = " << value << " > 1 at (t=" << t << ", mark " << x
       << "); the reference measure is not dominated by the compensator there";
    warn(os.str());
  }
  return value;
}

namespace {

double rescale_factor(RescaleMode mode, double psi_value) {
  switch (mode) {
    case RescaleMode::SqrtPsi: return std::sqrt(psi_value);
    case RescaleMode::Psi: return psi_value;
    case RescaleMode::None: return 1.0;
  }
  return 1.0;
}

}  // namespace

MeasureNodes measure_nodes(const Model& model, const ZetaSpec& zeta, const Path& path, QuadSpec quad,
                           RescaleMode mode) {
  return measure_nodes(model, ReferenceMeasure(model, zeta), path, quad, mode);
}

MeasureNodes measure_nodes(const Model& model, const ReferenceMeasure& reference, const Path& path,
                           QuadSpec quad, RescaleMode mode) {
  if (quad.nodes < 2) {
    throw Error(ErrorCode::GridTooCoarse,
                "each inter-jump interval needs at least 2 quadrature nodes, got " + std::to_string(quad.nodes));
  }
  const int n_marks = model.num_marks();
  MeasureNodes out;
  out.mode = mode;
  out.horizon = model.horizon();
  out.num_marks = n_marks;
  out.rule = GaussLegendre::get(quad.nodes);
  out.jumps = path.events;
  const auto& gl = *out.rule;
  const int q = gl.size();

  int state = model.initial_state();
  double start = 0.0;
  const int n_jumps = path.size();
  out.segments.reserve(n_jumps + 1);
  out.atoms.reserve(n_jumps);
  for (int k = 0; k <= n_jumps; ++k) {
    const bool has_atom = k < n_jumps;
    const double end = has_atom ? path.events[k].time : model.horizon();
    const auto& nu = reference.marks(k + 1);

    if (end > start) {
      Segment seg;
      seg.start = start;
      seg.end = end;
      seg.prior_jumps = k;
      seg.closed_by_atom = has_atom;
      seg.times.resize(q);
      seg.cells.assign(static_cast<std::size_t>(q) * n_marks, 0.0);
      const double half = 0.5 * (end - start);
      const double mid = 0.5 * (end + start);
      for (int j = 0; j < q; ++j) {
        const double t = mid + half * gl.nodes()[j];
        seg.times[j] = t;
        const double hazard = model.state_hazard(state, t - start);
        const double w = reference.time_weight(t);
        for (int x = 0; x < n_marks; ++x) {
          const double rho = hazard * model.transition(state, x);
          if (rho <= 0.0) continue;
          const double psi_value = w * nu[x] / rho;
          if (psi_value > 1.0) ++out.psi_above_one;
          seg.cells[static_cast<std::size_t>(j) * n_marks + x] =
              -gl.weights()[j] * half * rescale_factor(mode, psi_value) * rho;
        }
      }
      out.segments.push_back(std::move(seg));
    }

    if (has_atom) {
      const auto& jump = path.events[k];
      const double rho = model.state_hazard(state, jump.time - start) * model.transition(state, jump.mark);
      if (!(rho > 0.0)) {
        throw Error(ErrorCode::ZeroCompensator, "jump " + std::to_string(k + 1) + " has zero compensator density");
      }
      const double psi_value = reference.time_weight(jump.time) * nu[jump.mark] / rho;
      if (psi_value > 1.0) ++out.psi_above_one;
      out.atoms.push_back({jump.time, jump.mark, rescale_factor(mode, psi_value)});
      state = model.next_state(state, jump.mark);
      start = jump.time;
    }
  }
  return out;
}

}  // namespace mppchaos
