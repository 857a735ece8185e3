#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "mppchaos/model.hpp"
#include "mppchaos/path.hpp"
#include "mppchaos/quadrature.hpp"
#include "mppchaos/zeta.hpp"

namespace mppchaos {

// Atom weight / cell density factor applied to the compensated jump measure q:
//   SqrtPsi  dm = sqrt(psi) dq   (default)
//   Psi      dm = psi dq
//   None     dm = dq
enum class RescaleMode { SqrtPsi, Psi, None };

const char* to_string(RescaleMode mode);
RescaleMode parse_rescale_mode(std::string_view text);

struct QuadSpec {
  int nodes = 16;  // Gauss-Legendre nodes per inter-jump interval
};

// zeta^alpha marks resolved against a validated model, cached by position
// in the model's support sequence.
class ReferenceMeasure {
 public:
  ReferenceMeasure(const Model& model, const ZetaSpec& zeta);

  double time_weight(double t) const { return zeta_.time_weight(t); }
  // nu_alpha over labels for jump alpha (1-based).
  const std::vector<double>& marks(int jump_index) const;
  const ZetaSpec& zeta() const { return zeta_; }

 private:
  const Model* model_;
  ZetaSpec zeta_;
  std::vector<std::vector<double>> by_sequence_;
  std::vector<std::pair<int, std::vector<double>>> overrides_;
};

struct Atom {
  double time = 0.0;
  int mark = 0;
  double weight = 0.0;
};

struct Cell {
  double time = 0.0;
  int mark = 0;
  double weight = 0.0;
};

// The part of (0, H] between two consecutive jumps: (T_alpha, T_{alpha+1}].
// The continuous part of m is carried by Gauss-Legendre nodes; cell
// weights are signed (-(rescale) * rho * quadrature weight).
struct Segment {
  double start = 0.0;
  double end = 0.0;
  int prior_jumps = 0;
  bool closed_by_atom = false;  // atoms[prior_jumps] sits at `end`
  std::vector<double> times;
  std::vector<double> cells;  // [node * num_marks + mark]

  double cell(int node, int mark, int num_marks) const { return cells[static_cast<std::size_t>(node) * num_marks + mark]; }
  // Maps t in [start, end] to the reference interval [-1, 1].
  double to_reference(double t) const { return (2.0 * t - start - end) / (end - start); }
};

// Per-path discretisation of the martingale measure m.
struct MeasureNodes {
  RescaleMode mode = RescaleMode::SqrtPsi;
  double horizon = 1.0;
  int num_marks = 1;
  std::shared_ptr<const GaussLegendre> rule;
  std::vector<Jump> jumps;
  std::vector<Atom> atoms;
  std::vector<Segment> segments;
  std::size_t psi_above_one = 0;

  std::vector<Cell> cells() const;
  std::size_t node_count() const;
  double total_atom_mass() const;
  double total_cell_mass() const;
};

// rho(t, x) = hazard(history(t-), t) * mark_kernel(history(t-), t)[x].
double compensator_density(const Model& model, const Path& path, double t, int x);

// psi(t, x) = d zeta / d compensator on (T_{alpha-1}, T_alpha]; warns when > 1.
double psi(const Model& model, const ZetaSpec& zeta, const Path& path, double t, int x);

MeasureNodes measure_nodes(const Model& model, const ZetaSpec& zeta, const Path& path,
                           QuadSpec quad = {}, RescaleMode mode = RescaleMode::SqrtPsi);
MeasureNodes measure_nodes(const Model& model, const ReferenceMeasure& reference, const Path& path,
                           QuadSpec quad = {}, RescaleMode mode = RescaleMode::SqrtPsi);

}  // namespace mppchaos
