#include "mppchaos/completeness.hpp"

#include <cmath>
#include <ostream>

#include "mppchaos/error.hpp"

namespace mppchaos {

CompletenessResult completeness_report(const Model& model, const ZetaSpec& zeta, std::span<const Path> paths,
                                       std::span<const Functional> functionals, const CompletenessOptions& options) {
  const auto basis = build_basis(options.max_order, options.time_degree, model.num_marks(), model.horizon());
  const ReferenceMeasure ref(model, zeta);
  const auto features = evaluate_features(model, ref, paths, basis, options.quad, options.mode, options.workers);

  CompletenessResult out;
  for (const auto& functional : functionals) {
    std::vector<double> y(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) y[i] = functional(model, paths[i]);
    const auto proj = project(y, features, basis, options.ridge);
    out.condition_number = proj.condition_number;
    out.dropped_columns = proj.dropped_columns.size();

    std::optional<ChaosTail> tail;
    try {
      tail = chaos_tail(model, zeta, functional, basis, options.mode, options.oracle);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unsupported) throw;
    }
    const auto thresholds = options.thresholds.find(functional.name);
    for (int m = 0; m <= basis.max_order(); ++m) {
      CompletenessEntry entry;
      entry.functional = functional.name;
      entry.order = m;
      entry.residual_fraction = proj.residual_fraction[m];
      entry.std_error = proj.std_error[m];
      if (tail) {
        entry.oracle_value = tail->residual_fraction[m];
        entry.oracle_bound = tail->error_bound;
      }
      if (thresholds != options.thresholds.end()) {
        const auto t = thresholds->second.find(m);
        if (t != thresholds->second.end()) entry.threshold = t->second;
      }
      if (entry.threshold) {
        entry.status = entry.residual_fraction < *entry.threshold ? RowStatus::Pass : RowStatus::Fail;
      } else if (entry.oracle_value) {
        entry.status = statistical_row("", "", entry.residual_fraction, entry.std_error, *entry.oracle_value,
                                       entry.oracle_bound, options.z, "")
                           .status;
      } else {
        entry.status = RowStatus::Info;
      }
      out.entries.push_back(entry);
    }
  }
  return out;
}

void write_completeness_csv(std::ostream& out, const CompletenessResult& result) {
  out << "functional,order,residual_fraction,std_error,oracle_value,pass\n";
  for (const auto& e : result.entries) {
    out << e.functional << ',' << e.order << ',' << format_number(e.residual_fraction) << ','
        << format_number(e.std_error) << ','
        << (e.oracle_value ? format_number(*e.oracle_value) : std::string("nan")) << ',' << to_string(e.status)
        << '\n';
  }
}

}  // namespace mppchaos
