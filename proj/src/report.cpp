#include "perdeg/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace perdeg {

CertificateEntry summarize(const std::string& name, const Certificate& cert) {
  CertificateEntry e;
  e.name = name;
  e.theorem = to_string(cert.theorem);
  e.valid = cert.valid;
  e.predicted_degree = cert.predicted_degree;
  e.period = cert.period;
  e.delta = cert.delta;
  e.mu = cert.mu;
  e.failures = cert.failures;
  for (const auto& r : cert.reports) {
    ConditionEntry c;
    c.label = r.label;
    c.required = r.required;
    c.period = r.report.period;
    c.a1_max_defect = r.report.a1_max_defect;
    c.a2_max_gap = r.report.a2_max_gap;
    c.a3_min_gap = r.report.a3_min_gap;
    c.a4_min_gap = r.report.a4_min_gap;
    c.pass_a1 = r.report.pass_a1();
    c.pass_a2 = r.report.pass_a2();
    c.pass_a3 = r.report.pass_a3();
    c.pass_a4 = r.report.pass_a4();
    c.boundary_samples = r.report.boundary_samples;
    c.s_grid_size = r.report.s_grid_size;
    c.collapsed_samples = r.report.collapsed_samples;
    c.tol_eq = r.report.thresholds.tol_eq;
    c.floor_neq = r.report.thresholds.floor_neq;
    e.conditions.push_back(std::move(c));
  }
  for (const auto& d : cert.degrees) {
    e.degrees.push_back({d.label, d.result.degree, d.result.boundary_margin, d.result.samples_used,
                         d.result.refinements});
  }
  return e;
}

std::vector<MarginRow> margin_rows(const std::string& name, const Certificate& cert) {
  std::vector<MarginRow> rows;
  for (const auto& r : cert.reports) {
    for (const auto& s : r.report.samples) {
      rows.push_back({name, r.label, s.curve, s.theta, s.xi.x(), s.xi.y(), s.a1_defect, s.eta1_gap_max,
                      s.eta1_gap_min, s.eta2_gap_min, s.s_collapsed});
    }
  }
  return rows;
}

VerifyEntry summarize(const std::string& name, const VerificationRow& row) {
  VerifyEntry e;
  e.certificate = name;
  e.epsilon = row.epsilon;
  e.mu = row.mu;
  e.period = row.period;
  e.found = row.found;
  e.residual = row.residual;
  e.amplitude = row.amplitude;
  e.in_region = row.in_region;
  e.conclusion = row.conclusion;
  e.attempts = static_cast<int>(row.attempts.size());
  for (const auto& a : row.attempts) {
    e.attempts_found += a.found ? 1 : 0;
  }
  return e;
}

namespace {

double get_double(const json& j) {
  if (j.is_null()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

json degree_json(const DegreeEntry& d) {
  return {{"label", d.label},
          {"degree", d.degree},
          {"boundary_margin", d.boundary_margin},
          {"samples_used", d.samples_used},
          {"refinements", d.refinements}};
}

json condition_json(const ConditionEntry& c) {
  return {{"label", c.label},
          {"required", c.required},
          {"period", c.period},
          {"a1_max_defect", c.a1_max_defect},
          {"a2_max_gap", c.a2_max_gap},
          {"a3_min_gap", c.a3_min_gap},
          {"a4_min_gap", c.a4_min_gap},
          {"pass_a1", c.pass_a1},
          {"pass_a2", c.pass_a2},
          {"pass_a3", c.pass_a3},
          {"pass_a4", c.pass_a4},
          {"boundary_samples", c.boundary_samples},
          {"s_grid_size", c.s_grid_size},
          {"collapsed_samples", c.collapsed_samples},
          {"tol_eq", c.tol_eq},
          {"floor_neq", c.floor_neq}};
}

json certificate_json(const CertificateEntry& c) {
  json conditions = json::array();
  for (const auto& x : c.conditions) {
    conditions.push_back(condition_json(x));
  }
  json degrees = json::array();
  for (const auto& d : c.degrees) {
    degrees.push_back(degree_json(d));
  }
  return {{"name", c.name},
          {"theorem", c.theorem},
          {"valid", c.valid},
          {"predicted_degree", c.predicted_degree},
          {"period", c.period},
          {"delta", c.delta},
          {"mu", c.mu},
          {"failures", c.failures},
          {"conditions", conditions},
          {"degrees", degrees}};
}

json margin_json(const MarginRow& m) {
  return {{"certificate", m.certificate}, {"boundary", m.boundary},         {"curve", m.curve},
          {"theta", m.theta},             {"xi1", m.xi1},                   {"xi2", m.xi2},
          {"a1_defect", m.a1_defect},     {"eta1_gap_max", m.eta1_gap_max}, {"eta1_gap_min", m.eta1_gap_min},
          {"eta2_gap_min", m.eta2_gap_min}, {"s_collapsed", m.s_collapsed}};
}

json verify_json(const VerifyEntry& v) {
  return {{"certificate", v.certificate}, {"epsilon", v.epsilon},     {"mu", v.mu},
          {"period", v.period},           {"found", v.found},         {"residual", v.residual},
          {"amplitude", v.amplitude},     {"in_region", v.in_region}, {"conclusion", v.conclusion},
          {"attempts", v.attempts},       {"attempts_found", v.attempts_found}};
}

json mu_json(const MuScanEntry& m) {
  return {{"mu", m.mu},
          {"valid", m.valid},
          {"matches_base", m.matches_base},
          {"a3_min_gap", m.a3_min_gap},
          {"a4_min_gap", m.a4_min_gap},
          {"degree_difference", m.degree_difference}};
}

void write_string(std::ostringstream& out, const std::string& s) {
  out << json(s).dump();
}

void write(const json& j, std::ostringstream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out << inner;
        write_string(out, it.key());
        out << ": ";
        write(it.value(), out, indent + 1);
        out << (i + 1 < j.size() ? ",\n" : "\n");
      }
      out << pad << '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out << inner;
        write(j[i], out, indent + 1);
        out << (i + 1 < j.size() ? ",\n" : "\n");
      }
      out << pad << ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out << (std::isfinite(v) ? format_double(v) : "null");
      return;
    }
    case json::value_t::string:
      write_string(out, j.get<std::string>());
      return;
    default:
      out << j.dump();
  }
}

template <typename T, typename F>
std::vector<T> read_array(const json& j, F&& f) {
  std::vector<T> out;
  for (const auto& x : j) {
    out.push_back(f(x));
  }
  return out;
}

std::string csv_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) {
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) {
    s += ".0";
  }
  return s;
}

json to_json(const RunReport& r) {
  json certs = json::array();
  for (const auto& c : r.certificates) {
    certs.push_back(certificate_json(c));
  }
  json margins = json::array();
  for (const auto& m : r.margins) {
    margins.push_back(margin_json(m));
  }
  json verify = json::array();
  for (const auto& v : r.verification) {
    verify.push_back(verify_json(v));
  }
  json mus = json::array();
  for (const auto& m : r.mu_scan) {
    mus.push_back(mu_json(m));
  }
  json out;
  out["config"] = r.config;
  out["certificates"] = certs;
  out["margins"] = margins;
  out["verification"] = verify;
  out["mu_scan"] = mus;
  out["has_mu_scan"] = r.has_mu_scan;
  out["mu_hat"] = r.mu_hat;
  out["mu_grid_step"] = r.mu_grid_step;
  out["mu_range_label"] = r.mu_range_label;
  out["headline_valid"] = r.headline_valid;
  return out;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.config = j.at("config");
  r.certificates = read_array<CertificateEntry>(j.at("certificates"), [](const json& c) {
    CertificateEntry e;
    e.name = c.at("name");
    e.theorem = c.at("theorem");
    e.valid = c.at("valid");
    e.predicted_degree = c.at("predicted_degree");
    e.period = get_double(c.at("period"));
    e.delta = get_double(c.at("delta"));
    e.mu = get_double(c.at("mu"));
    e.failures = c.at("failures").get<std::vector<std::string>>();
    e.conditions = read_array<ConditionEntry>(c.at("conditions"), [](const json& x) {
      ConditionEntry k;
      k.label = x.at("label");
      k.required = x.at("required").get<std::vector<std::string>>();
      k.period = get_double(x.at("period"));
      k.a1_max_defect = get_double(x.at("a1_max_defect"));
      k.a2_max_gap = get_double(x.at("a2_max_gap"));
      k.a3_min_gap = get_double(x.at("a3_min_gap"));
      k.a4_min_gap = get_double(x.at("a4_min_gap"));
      k.pass_a1 = x.at("pass_a1");
      k.pass_a2 = x.at("pass_a2");
      k.pass_a3 = x.at("pass_a3");
      k.pass_a4 = x.at("pass_a4");
      k.boundary_samples = x.at("boundary_samples");
      k.s_grid_size = x.at("s_grid_size");
      k.collapsed_samples = x.at("collapsed_samples");
      k.tol_eq = get_double(x.at("tol_eq"));
      k.floor_neq = get_double(x.at("floor_neq"));
      return k;
    });
    e.degrees = read_array<DegreeEntry>(c.at("degrees"), [](const json& x) {
      return DegreeEntry{x.at("label"), x.at("degree"), get_double(x.at("boundary_margin")), x.at("samples_used"),
                         x.at("refinements")};
    });
    return e;
  });
  r.margins = read_array<MarginRow>(j.at("margins"), [](const json& m) {
    return MarginRow{m.at("certificate"),
                     m.at("boundary"),
                     m.at("curve"),
                     get_double(m.at("theta")),
                     get_double(m.at("xi1")),
                     get_double(m.at("xi2")),
                     get_double(m.at("a1_defect")),
                     get_double(m.at("eta1_gap_max")),
                     get_double(m.at("eta1_gap_min")),
                     get_double(m.at("eta2_gap_min")),
                     m.at("s_collapsed")};
  });
  r.verification = read_array<VerifyEntry>(j.at("verification"), [](const json& v) {
    VerifyEntry e;
    e.certificate = v.at("certificate");
    e.epsilon = get_double(v.at("epsilon"));
    e.mu = get_double(v.at("mu"));
    e.period = get_double(v.at("period"));
    e.found = v.at("found");
    e.residual = get_double(v.at("residual"));
    e.amplitude = get_double(v.at("amplitude"));
    e.in_region = v.at("in_region");
    e.conclusion = v.at("conclusion");
    e.attempts = v.at("attempts");
    e.attempts_found = v.at("attempts_found");
    return e;
  });
  r.mu_scan = read_array<MuScanEntry>(j.at("mu_scan"), [](const json& m) {
    return MuScanEntry{get_double(m.at("mu")),         m.at("valid"),
                       m.at("matches_base"),           get_double(m.at("a3_min_gap")),
                       get_double(m.at("a4_min_gap")), m.at("degree_difference")};
  });
  r.has_mu_scan = j.at("has_mu_scan");
  r.mu_hat = get_double(j.at("mu_hat"));
  r.mu_grid_step = get_double(j.at("mu_grid_step"));
  r.mu_range_label = j.at("mu_range_label");
  r.headline_valid = j.at("headline_valid");
  return r;
}

std::string dump_json(const json& j) {
  std::ostringstream out;
  write(j, out, 0);
  out << '\n';
  return out.str();
}

std::string margins_csv(const RunReport& r) {
  std::ostringstream out;
  out << "certificate,boundary,curve,theta,xi1,xi2,a1_defect,eta1_gap_max,eta1_gap_min,eta2_gap_min,s_collapsed\n";
  for (const auto& m : r.margins) {
    out << m.certificate << ',' << m.boundary << ',' << m.curve << ',' << format_double(m.theta) << ','
        << format_double(m.xi1) << ',' << format_double(m.xi2) << ',' << format_double(m.a1_defect) << ','
        << format_double(m.eta1_gap_max) << ',' << format_double(m.eta1_gap_min) << ','
        << format_double(m.eta2_gap_min) << ',' << csv_bool(m.s_collapsed) << '\n';
  }
  return out.str();
}

std::string verify_csv(const RunReport& r) {
  std::ostringstream out;
  out << "epsilon,mu,found,residual,amplitude,in_region\n";
  for (const auto& v : r.verification) {
    out << format_double(v.epsilon) << ',' << format_double(v.mu) << ',' << csv_bool(v.found) << ','
        << format_double(v.residual) << ',' << format_double(v.amplitude) << ',' << csv_bool(v.in_region) << '\n';
  }
  return out.str();
}

std::string mu_scan_csv(const RunReport& r) {
  std::ostringstream out;
  out << "mu,valid,matches_base,a3_min_gap,a4_min_gap,degree_difference\n";
  for (const auto& m : r.mu_scan) {
    out << format_double(m.mu) << ',' << csv_bool(m.valid) << ',' << csv_bool(m.matches_base) << ','
        << format_double(m.a3_min_gap) << ',' << format_double(m.a4_min_gap) << ',' << m.degree_difference << '\n';
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  f << text;
  if (!f) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

}  // namespace

void emit_report(const RunReport& report, const std::string& dir, const std::vector<std::string>& formats) {
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);
  for (const auto& fmt : formats) {
    if (fmt == "json") {
      write_file(base / "report.json", dump_json(to_json(report)));
    } else if (fmt == "csv") {
      write_file(base / "margins.csv", margins_csv(report));
      write_file(base / "verify.csv", verify_csv(report));
      write_file(base / "mu_scan.csv", mu_scan_csv(report));
    } else {
      throw std::invalid_argument("unknown report format '" + fmt + "' (expected json or csv)");
    }
  }
}

}  // namespace perdeg
