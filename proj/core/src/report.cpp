#include "mppchaos/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>

namespace mppchaos {

const char* to_string(RowStatus status) {
  switch (status) {
    case RowStatus::Pass: return "pass";
    case RowStatus::Fail: return "fail";
    case RowStatus::Info: return "info";
  }
  return "fail";
}

ReportRow statistical_row(std::string test, std::string statistic, double estimate, double std_error, double target,
                          double target_bound, double z_threshold, std::string provenance) {
  ReportRow row{std::move(test), std::move(statistic), estimate, std_error, target, target_bound, 0.0,
                RowStatus::Pass, std::move(provenance)};
  const double diff = estimate - target;
  const double excess = std::max(std::abs(diff) - target_bound, 0.0);
  const double floor = kNumericalFloor * std::max(1.0, std::abs(target));
  if (excess <= floor) {
    row.z_score = 0.0;
  } else if (std_error > 0.0) {
    row.z_score = std::copysign(excess / std_error, diff);
  } else {
    row.z_score = std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  row.status = std::abs(row.z_score) <= z_threshold ? RowStatus::Pass : RowStatus::Fail;
  if (!std::isfinite(estimate)) row.status = RowStatus::Fail;
  return row;
}

ReportRow exact_row(std::string test, std::string statistic, double estimate, double target, double tolerance,
                    std::string provenance) {
  ReportRow row{std::move(test), std::move(statistic), estimate, 0.0, target, tolerance,
                std::numeric_limits<double>::quiet_NaN(), RowStatus::Pass, std::move(provenance)};
  row.status = std::abs(estimate - target) <= tolerance ? RowStatus::Pass : RowStatus::Fail;
  return row;
}

ReportRow threshold_row(std::string test, std::string statistic, double estimate, double std_error, double bound) {
  ReportRow row{std::move(test), std::move(statistic), estimate, std_error, bound, 0.0,
                std::numeric_limits<double>::quiet_NaN(), RowStatus::Pass, "threshold"};
  row.status = estimate < bound ? RowStatus::Pass : RowStatus::Fail;
  return row;
}

ReportRow info_row(std::string test, std::string statistic, double estimate, double std_error, double target,
                   std::string provenance) {
  ReportRow row{std::move(test), std::move(statistic), estimate, std_error, target, 0.0, 0.0, RowStatus::Info,
                std::move(provenance)};
  const double diff = estimate - target;
  row.z_score = std_error > 0.0 ? diff / std_error : (diff == 0.0 ? 0.0 : std::copysign(
                                                                              std::numeric_limits<double>::infinity(), diff));
  return row;
}

bool Report::all_pass() const {
  for (const auto& r : rows)
    if (r.status == RowStatus::Fail) return false;
  return true;
}

std::vector<ReportRow> Report::failures() const {
  std::vector<ReportRow> out;
  for (const auto& r : rows)
    if (r.status == RowStatus::Fail) out.push_back(r);
  return out;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::ordered_json json_number(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return v;
}

}  // namespace

void write_report_csv(std::ostream& out, const Report& report) {
  out << "test,statistic,estimate,std_error,target,z_score,pass\n";
  for (const auto& r : report.rows) {
    out << csv_field(r.test) << ',' << csv_field(r.statistic) << ',' << format_number(r.estimate) << ','
        << format_number(r.std_error) << ',' << format_number(r.target) << ',' << format_number(r.z_score) << ','
        << to_string(r.status) << '\n';
  }
}

void write_report_json(std::ostream& out, const Report& report) {
  nlohmann::ordered_json root;
  root["stamp"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.stamp) root["stamp"][k] = v;
  root["all_pass"] = report.all_pass();
  root["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["test"] = r.test;
    row["statistic"] = r.statistic;
    row["estimate"] = json_number(r.estimate);
    row["std_error"] = json_number(r.std_error);
    row["target"] = json_number(r.target);
    row["target_bound"] = json_number(r.target_bound);
    row["z_score"] = json_number(r.z_score);
    row["pass"] = to_string(r.status);
    row["provenance"] = r.provenance;
    root["rows"].push_back(std::move(row));
  }
  out << root.dump(2) << '\n';
}

}  // namespace mppchaos
