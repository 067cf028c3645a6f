#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "perdeg/shooting.hpp"

namespace perdeg {

using json = nlohmann::json;

struct DegreeEntry {
  std::string label;
  int degree = 0;
  double boundary_margin = 0.0;
  int samples_used = 0;
  int refinements = 0;
  bool operator==(const DegreeEntry&) const = default;
};

struct ConditionEntry {
  std::string label;
  std::vector<std::string> required;
  double period = 0.0;
  double a1_max_defect = 0.0;
  double a2_max_gap = 0.0;
  double a3_min_gap = 0.0;
  double a4_min_gap = 0.0;
  bool pass_a1 = false;
  bool pass_a2 = false;
  bool pass_a3 = false;
  bool pass_a4 = false;
  int boundary_samples = 0;
  int s_grid_size = 0;
  int collapsed_samples = 0;
  double tol_eq = 0.0;
  double floor_neq = 0.0;
  bool operator==(const ConditionEntry&) const = default;
};

struct CertificateEntry {
  std::string name;  // e.g. "one_term_annulus", "two_term_annulus"
  std::string theorem;
  bool valid = false;
  int predicted_degree = 0;
  double period = 0.0;
  double delta = 0.0;
  double mu = 0.0;
  std::vector<std::string> failures;
  std::vector<ConditionEntry> conditions;
  std::vector<DegreeEntry> degrees;
  bool operator==(const CertificateEntry&) const = default;
};

struct MarginRow {
  std::string certificate;
  std::string boundary;
  int curve = 0;
  double theta = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
  double a1_defect = 0.0;
  double eta1_gap_max = 0.0;
  double eta1_gap_min = 0.0;
  double eta2_gap_min = 0.0;
  bool s_collapsed = false;
  bool operator==(const MarginRow&) const = default;
};

struct VerifyEntry {
  std::string certificate;
  double epsilon = 0.0;
  double mu = 0.0;
  double period = 0.0;
  bool found = false;
  double residual = 0.0;
  double amplitude = 0.0;
  bool in_region = false;
  std::string conclusion;
  int attempts = 0;
  int attempts_found = 0;
  bool operator==(const VerifyEntry&) const = default;
};

struct MuScanEntry {
  double mu = 0.0;
  bool valid = false;
  bool matches_base = false;
  double a3_min_gap = 0.0;
  double a4_min_gap = 0.0;
  int degree_difference = 0;
  bool operator==(const MuScanEntry&) const = default;
};

struct RunReport {
  json config;  // echo of the effective configuration
  std::vector<CertificateEntry> certificates;
  std::vector<MarginRow> margins;
  std::vector<VerifyEntry> verification;
  std::vector<MuScanEntry> mu_scan;
  bool has_mu_scan = false;
  double mu_hat = 0.0;
  double mu_grid_step = 0.0;
  std::string mu_range_label;
  bool headline_valid = false;
  bool operator==(const RunReport&) const = default;
};

[[nodiscard]] CertificateEntry summarize(const std::string& name, const Certificate& cert);
[[nodiscard]] std::vector<MarginRow> margin_rows(const std::string& name, const Certificate& cert);
[[nodiscard]] VerifyEntry summarize(const std::string& name, const VerificationRow& row);

[[nodiscard]] json to_json(const RunReport& report);
[[nodiscard]] RunReport report_from_json(const json& j);

/// Deterministic JSON text: keys sorted, doubles with 17 significant digits,
/// two-space indentation, "\n" line endings, trailing newline.
[[nodiscard]] std::string dump_json(const json& j);
/// Doubles as printed in every emitted file.
[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::string margins_csv(const RunReport& report);
[[nodiscard]] std::string verify_csv(const RunReport& report);
[[nodiscard]] std::string mu_scan_csv(const RunReport& report);

/// Writes report.json and/or margins.csv, verify.csv, mu_scan.csv into `dir`.
/// formats holds "json" and/or "csv". Throws std::runtime_error on IO failure.
void emit_report(const RunReport& report, const std::string& dir, const std::vector<std::string>& formats);

}  // namespace perdeg
