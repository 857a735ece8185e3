// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mppchaos/config.hpp"
#include "mppchaos/error.hpp"
#include "mppchaos/harness.hpp"
#include "mppchaos/report.hpp"

namespace {

using mppchaos::Report;
using mppchaos::ReportRow;
using mppchaos::RowStatus;

struct Run {
  std::string label;
  Report report;
};

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

// Every row matching the predicate must pass, and at least `min_rows` must exist.
struct Check {
  std::vector<std::string> notes;
  bool ok = true;

  void rows(const Run& run, const std::function<bool(const ReportRow&)>& match, std::size_t min_rows,
            const std::string& what) {
    std::size_t n = 0;
    for (const auto& row : run.report.rows) {
      if (!match(row)) continue;
      ++n;
      if (row.status == RowStatus::Fail) {
        ok = false;
        notes.push_back(run.label + ":" + row.test + " failed (estimate " + mppchaos::format_number(row.estimate) +
                        ", target " + mppchaos::format_number(row.target) + ")");
      }
    }
    if (n < min_rows) {
      ok = false;
      notes.push_back(run.label + ": expected at least " + std::to_string(min_rows) + " " + what + " rows, found " +
                      std::to_string(n));
    }
  }
  void prefix(const Run& run, const std::string& p, std::size_t min_rows) {
    rows(run, [&](const ReportRow& r) { return starts_with(r.test, p); }, min_rows, p);
  }
  void exact(const Run& run, const std::string& name) {
    rows(run, [&](const ReportRow& r) { return r.test == name; }, 1, name);
  }
};

void print(int id, const std::string& title, const Check& c) {
  std::printf("criterion %d: %s - %s\n", id, c.ok ? "PASS" : "FAIL", title.c_str());
  for (const auto& n : c.notes) std::printf("    %s\n", n.c_str());
}

std::string json_bytes(const Report& r) {
  std::ostringstream os;
  mppchaos::write_report_json(os, r);
  return os.str();
}

}  // namespace

int main() {
  const std::string dir = MPPCHAOS_CONFIG_DIR;
  const int many = std::max(4, static_cast<int>(std::thread::hardware_concurrency()));
  try {
    auto poisson_cfg = mppchaos::load_config(dir + "/poisson.json");
    auto ctmc_cfg = mppchaos::load_config(dir + "/ctmc.json");
    poisson_cfg.sim.workers = 1;
    ctmc_cfg.sim.workers = 1;
    const Run poisson{"poisson", mppchaos::run(poisson_cfg)};
    const Run ctmc{"ctmc", mppchaos::run(ctmc_cfg)};
    const std::vector<const Run*> both = {&poisson, &ctmc};

    bool all = true;
    auto finish = [&](int id, const std::string& title, const Check& c) {
      print(id, title, c);
      all = all && c.ok;
    };

    {
      Check c;
      for (const auto* r : both)
        for (const char* t : {"martingale.int_1", "martingale.int_t", "martingale.J2_1", "martingale.J3_1"})
          c.exact(*r, t);
      finish(1, "martingale zero-mean of int 1 dm, int t dm, J2(1), J3(1)", c);
    }
    {
      Check c;
      for (const auto* r : both) {
        c.exact(*r, "isometry.sqrt_psi.one");
        c.exact(*r, "isometry.sqrt_psi.t");
        c.prefix(*r, "isometry.sqrt_psi.mark=", 1);
        c.exact(*r, "isometry.zeta_unit_mass");
      }
      finish(2, "isometry (zeta form, sqrt_psi) for f in {1, t, mark indicators}; zeta mass H", c);
    }
    {
      Check c;
      for (const auto* r : both)
        c.rows(*r, [](const ReportRow& row) {
          return starts_with(row.test, "isometry.psi.") && row.test.find("stray_correction") != std::string::npos;
        }, 3, "stray correction");
      finish(3, "psi-mode deviation from the zeta form equals the oracle stray-psi correction", c);
    }
    {
      Check c;
      for (const auto* r : both)
        for (int n = 1; n <= 3; ++n) c.exact(*r, "isometry.simplex_volume.J" + std::to_string(n));
      finish(4, "simplex volume E[J^n(1)^2] = 1/n!, n = 1..3, Poisson and CTMC", c);
    }
    {
      Check c;
      for (const auto* r : both) {
        c.prefix(*r, "orthogonality.J", 30);
        c.prefix(*r, "orthogonality.gram_psd", 4);
      }
      finish(5, "cross-order orthogonality over 5 random basis pairs per order pair", c);
    }
    {
      Check c;
      c.exact(poisson, "completeness.count.r1");
      c.exact(poisson, "completeness.count_squared.r2");
      for (int m = 0; m <= 3; ++m) c.exact(poisson, "completeness.exp_neg_count.r" + std::to_string(m));
      c.exact(poisson, "completeness.exp_neg_count.strictly_decreasing");
      c.exact(ctmc, "completeness.terminal_state:0.r3");
      finish(6, "chaos completeness residual fractions (thresholds and oracle tails)", c);
    }
    {
      Check c;
      for (const auto* r : both) {
        c.prefix(*r, "telescoping.martingale_increments", 1);
        c.prefix(*r, "telescoping.rescale_equivalence", 2);
        c.prefix(*r, "boundary.expansion", 9);
        c.prefix(*r, "boundary.tau_cap_open", 3);
        c.prefix(*r, "boundary.jump_cap_closed", 3);
      }
      finish(7, "exact per-path identities at tolerance 1e-9", c);
    }
    {
      Check c;
      for (const char* t : {"oracle.closed_form.count", "oracle.closed_form.count_squared",
                            "oracle.closed_form.exp_neg_count"})
        c.exact(poisson, t);
      for (const auto* r : both) {
        c.exact(*r, "oracle.occupancy_partition");
        c.prefix(*r, "oracle.quadrature_doubling", 3);
      }
      finish(8, "oracle closed forms, occupancy partition, quadrature doubling", c);
    }
    {
      Check c;
      for (auto cfg : {poisson_cfg, ctmc_cfg}) {
        const std::string once = json_bytes(cfg.name == "poisson" ? poisson.report : ctmc.report);
        const std::string again = json_bytes(mppchaos::run(cfg));
        cfg.sim.workers = many;
        const std::string parallel = json_bytes(mppchaos::run(cfg));
        if (once != again) {
          c.ok = false;
          c.notes.push_back(cfg.name + ": repeated run differs");
        }
        if (once != parallel) {
          c.ok = false;
          c.notes.push_back(cfg.name + ": 1 worker vs " + std::to_string(many) + " workers differ");
        }
      }
      finish(9, "identical report bytes across runs and worker counts", c);
    }
    return all ? 0 : 1;
  } catch (const mppchaos::Error& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
}
