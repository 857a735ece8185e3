#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mppchaos {

enum class RowStatus { Pass, Fail, Info };

const char* to_string(RowStatus status);

// One verification result. For statistical rows the z-score is
// (|estimate - target| - target_bound)_+ / std_error with the sign of the
// difference, and pass <=> |z| <= threshold. Exact rows compare against an
// absolute tolerance; threshold rows require estimate < target.
// Statistical rows with an excess below kNumericalFloor * max(1, |target|)
// get z = 0, so that zero-variance statistics are not failed on double rounding.
inline constexpr double kNumericalFloor = 1e-12;

struct ReportRow {
  std::string test;
  std::string statistic;
  double estimate = 0.0;
  double std_error = 0.0;
  double target = 0.0;
  double target_bound = 0.0;  // uncertainty of the target itself
  double z_score = 0.0;
  RowStatus status = RowStatus::Pass;
  std::string provenance;     // oracle, closed_form, exact_identity, threshold, ...
};

ReportRow statistical_row(std::string test, std::string statistic, double estimate, double std_error, double target,
                          double target_bound, double z_threshold, std::string provenance);
ReportRow exact_row(std::string test, std::string statistic, double estimate, double target, double tolerance,
                    std::string provenance);
ReportRow threshold_row(std::string test, std::string statistic, double estimate, double std_error, double bound);
ReportRow info_row(std::string test, std::string statistic, double estimate, double std_error, double target,
                   std::string provenance);

struct Report {
  std::vector<std::pair<std::string, std::string>> stamp;
  std::vector<ReportRow> rows;

  void add(ReportRow row) { rows.push_back(std::move(row)); }
  bool all_pass() const;
  std::vector<ReportRow> failures() const;
};

// Shortest text that round-trips (%.17g), "nan"/"inf" for non-finite values.
std::string format_number(double value);

// CSV columns: test,statistic,estimate,std_error,target,z_score,pass
void write_report_csv(std::ostream& out, const Report& report);
void write_report_json(std::ostream& out, const Report& report);

}  // namespace mppchaos
