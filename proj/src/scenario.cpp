#include "perdeg/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace perdeg {

namespace {

FieldEval rotation_field() {
  return FieldEval([](double, const Vector& x) -> Vector { return Vector{{x[1], -x[0]}}; },
                   [](double, const Vector&) -> Matrix { return Matrix{{0.0, 1.0}, {-1.0, 0.0}}; });
}

FieldEval vdp_damping() {
  return FieldEval([](double, const Vector& x) -> Vector { return Vector{{0.0, (1.0 - x[0] * x[0]) * x[1]}}; },
                   [](double, const Vector& x) -> Matrix {
                     return Matrix{{0.0, 0.0}, {-2.0 * x[0] * x[1], 1.0 - x[0] * x[0]}};
                   });
}

Forcing sine_forcing() {
  Forcing f;
  f.f = [](double t, const Vector&, double, double) -> Vector { return Vector{{0.0, -std::sin(t)}}; };
  f.jac = [](double, const Vector&, double, double) -> Matrix { return Matrix::Zero(2, 2); };
  return f;
}

std::vector<std::string> zeros(std::size_t n) { return std::vector<std::string>(n, "0"); }

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config key '") + key + "': " + ex.what());
  }
}

json normal_form_echo(const std::vector<double>& eps_physical) {
  json rows = json::array();
  for (double e : eps_physical) {
    const double engine = engine_epsilon(e);
    rows.push_back({{"epsilon_physical", e},
                    {"epsilon_engine", engine},
                    {"engine_squared", engine * engine},
                    {"engine_cubed", engine * engine * engine},
                    {"physical_times_sqrt", e * std::sqrt(e)}});
  }
  return rows;
}

}  // namespace

PerturbedSystem vdp_two_term(Tolerances tol) {
  return make_two_term(2, 2.0 * kPi, rotation_field(), vdp_damping(), sine_forcing(), tol);
}

PerturbedSystem vdp_one_term(Tolerances tol) {
  const FieldEval damping = vdp_damping();
  Forcing phi;
  phi.f = [damping](double t, const Vector& x, double, double) { return damping(t, x); };
  phi.jac = [damping](double t, const Vector& x, double, double) { return damping.jacobian(t, x); };
  return make_one_term(2, 2.0 * kPi, rotation_field(), phi, tol);
}

double engine_epsilon(double eps_physical) { return std::sqrt(eps_physical); }

PlanarRegion RegionSpec::build(int samples) const {
  PlanarRegion region;
  if (type == "disc") {
    region = PlanarRegion::disc(center, radius, samples);
  } else if (type == "annulus") {
    region = PlanarRegion::annulus(center, r_in, r_out, samples);
  } else if (type == "samples") {
    region = PlanarRegion{BoundaryCurve::polygon(points, Orientation::CCW, samples), {}};
  } else {
    throw ConfigError("unknown region type '" + type + "' (expected disc, annulus or samples)");
  }
  region.validate();
  return region;
}

json RegionSpec::to_json() const {
  json j{{"type", type}, {"center", {center.x(), center.y()}}};
  if (type == "disc") {
    j["radius"] = radius;
  } else if (type == "annulus") {
    j["r_in"] = r_in;
    j["r_out"] = r_out;
  } else {
    json pts = json::array();
    for (const auto& p : points) {
      pts.push_back({p.x(), p.y()});
    }
    j["points"] = pts;
  }
  return j;
}

RegionSpec RegionSpec::from_json(const json& j) {
  RegionSpec r;
  r.type = value_or<std::string>(j, "type", "disc");
  const auto c = value_or<std::vector<double>>(j, "center", {0.0, 0.0});
  if (c.size() != 2) {
    throw ConfigError("region center needs two coordinates");
  }
  r.center = Point2(c[0], c[1]);
  r.radius = value_or<double>(j, "radius", r.radius);
  r.r_in = value_or<double>(j, "r_in", r.r_in);
  r.r_out = value_or<double>(j, "r_out", r.r_out);
  if (j.contains("points")) {
    for (const auto& p : j.at("points")) {
      const auto v = p.get<std::vector<double>>();
      if (v.size() != 2) {
        throw ConfigError("region points need two coordinates");
      }
      r.points.emplace_back(v[0], v[1]);
    }
  }
  return r;
}

RegionSpec RegionSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("region spec '" + text + "' must look like disc:cx,cy,r or annulus:cx,cy,rin,rout");
  }
  RegionSpec r;
  r.type = text.substr(0, colon);
  std::vector<double> nums;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      nums.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("region spec '" + text + "': bad number '" + item + "'");
    }
  }
  if (r.type == "disc" && nums.size() == 3) {
    r.center = Point2(nums[0], nums[1]);
    r.radius = nums[2];
  } else if (r.type == "annulus" && nums.size() == 4) {
    r.center = Point2(nums[0], nums[1]);
    r.r_in = nums[2];
    r.r_out = nums[3];
  } else {
    throw ConfigError("region spec '" + text + "' must look like disc:cx,cy,r or annulus:cx,cy,rin,rout");
  }
  return r;
}

json SystemSpec::to_json() const {
  json j{{"type", type}, {"epsilon_scale", epsilon_scale}};
  if (type == "custom") {
    j["profile"] = profile;
    j["period"] = period;
    j["psi"] = psi;
    j["phi1"] = phi1;
    j["phi2"] = phi2;
  }
  return j;
}

SystemSpec SystemSpec::from_json(const json& j) {
  SystemSpec s;
  s.type = value_or<std::string>(j, "type", "vdp");
  if (s.type != "vdp" && s.type != "custom") {
    throw ConfigError("system type must be 'vdp' or 'custom'");
  }
  s.epsilon_scale = value_or<std::string>(j, "epsilon_scale", s.type == "vdp" ? "sqrt" : "engine");
  if (s.epsilon_scale != "sqrt" && s.epsilon_scale != "engine") {
    throw ConfigError("epsilon_scale must be 'sqrt' or 'engine'");
  }
  if (s.type == "custom") {
    s.profile = value_or<std::string>(j, "profile", "two_term");
    if (s.profile != "two_term" && s.profile != "one_term") {
      throw ConfigError("profile must be 'two_term' or 'one_term'");
    }
    if (j.contains("period") && j.at("period").is_number()) {
      std::ostringstream p;
      p.precision(17);
      p << j.at("period").get<double>();
      s.period = p.str();
    } else {
      s.period = value_or<std::string>(j, "period", "2*pi");
    }
    s.psi = value_or<std::vector<std::string>>(j, "psi", {});
    if (s.psi.empty()) {
      throw ConfigError("custom system needs a 'psi' expression list");
    }
    s.phi1 = value_or<std::vector<std::string>>(j, "phi1", zeros(s.psi.size()));
    const char* phi2_key = (s.profile == "one_term" && j.contains("phi")) ? "phi" : "phi2";
    s.phi2 = value_or<std::vector<std::string>>(j, phi2_key, zeros(s.psi.size()));
  }
  return s;
}

json ScenarioConfig::to_json() const {
  return {{"system", system.to_json()},
          {"region", region.to_json()},
          {"theorem", {{"id", theorem}, {"delta", delta}}},
          {"grids", {{"boundary_samples", boundary_samples}, {"s_samples", s_samples}, {"time_samples", time_samples}}},
          {"tolerances",
           {{"abs_tol", integration.abs_tol},
            {"rel_tol", integration.rel_tol},
            {"tol_eq", thresholds.tol_eq},
            {"floor_neq", thresholds.floor_neq}}},
          {"epsilons", epsilons},
          {"mu_grid", mu_grid},
          {"mu_verify", mu_verify},
          {"output", {{"dir", output_dir}, {"formats", formats}}}};
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  static const std::vector<std::string> known{"system",   "region",  "theorem",   "grids", "tolerances",
                                              "epsilons", "mu_grid", "mu_verify", "output"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ConfigError("unknown config key '" + it.key() + "'");
    }
  }
  ScenarioConfig c;
  if (j.contains("system")) {
    c.system = SystemSpec::from_json(j.at("system"));
  }
  if (c.system.type == "vdp") {
    c = vdp_defaults();
  }
  if (j.contains("region")) {
    c.region = RegionSpec::from_json(j.at("region"));
  }
  if (j.contains("theorem")) {
    const json& t = j.at("theorem");
    if (t.is_string()) {
      c.theorem = t.get<std::string>();
    } else {
      c.theorem = value_or<std::string>(t, "id", c.theorem);
      c.delta = value_or<double>(t, "delta", c.delta);
    }
  }
  if (j.contains("grids")) {
    const json& g = j.at("grids");
    c.boundary_samples = value_or<int>(g, "boundary_samples", c.boundary_samples);
    c.s_samples = value_or<int>(g, "s_samples", c.s_samples);
    c.time_samples = value_or<int>(g, "time_samples", c.time_samples);
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    c.integration.abs_tol = value_or<double>(t, "abs_tol", c.integration.abs_tol);
    c.integration.rel_tol = value_or<double>(t, "rel_tol", c.integration.rel_tol);
    c.thresholds.tol_eq = value_or<double>(t, "tol_eq", c.thresholds.tol_eq);
    c.thresholds.floor_neq = value_or<double>(t, "floor_neq", c.thresholds.floor_neq);
  }
  c.epsilons = value_or<std::vector<double>>(j, "epsilons", c.epsilons);
  c.mu_grid = value_or<std::vector<double>>(j, "mu_grid", c.mu_grid);
  c.mu_verify = value_or<std::vector<double>>(j, "mu_verify", c.mu_verify);
  if (j.contains("output")) {
    const json& o = j.at("output");
    c.output_dir = value_or<std::string>(o, "dir", c.output_dir);
    c.formats = value_or<std::vector<std::string>>(o, "formats", c.formats);
  }
  if (j.contains("system")) {
    c.system = SystemSpec::from_json(j.at("system"));
  }
  c.validate();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& ex) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + ex.what());
  }
  return from_json(j);
}

ScenarioConfig ScenarioConfig::vdp_defaults() {
  ScenarioConfig c;
  c.system = SystemSpec{};
  c.region.type = "disc";
  c.region.radius = 2.0;
  c.theorem = "T4";
  c.delta = 1.0;
  c.mu_grid = uniform_grid(-0.5, 0.5, 0.05);
  return c;
}

void ScenarioConfig::validate() const {
  (void)theorem_from_string(theorem);
  if (boundary_samples < 64) {
    throw ConfigError("grids.boundary_samples must be at least 64");
  }
  if (s_samples < 8) {
    throw ConfigError("grids.s_samples must be at least 8");
  }
  if (time_samples < 2) {
    throw ConfigError("grids.time_samples must be at least 2");
  }
  for (double e : epsilons) {
    if (!(e > 0.0)) {
      throw ConfigError("epsilons must be positive");
    }
  }
  if (system.type == "vdp") {
    if (!(delta > 0.0 && delta < 2.0)) {
      throw ConfigError("vdp scenario needs delta in (0, 2)");
    }
    for (double e : epsilons) {
      if (e > 0.25) {
        throw ConfigError("vdp scenario needs physical epsilons in (0, 0.25]");
      }
    }
  }
  for (const auto& f : formats) {
    if (f != "json" && f != "csv") {
      throw ConfigError("output format '" + f + "' is not json or csv");
    }
  }
}

double to_engine(const ScenarioConfig& config, double eps) {
  return config.system.epsilon_scale == "sqrt" ? engine_epsilon(eps) : eps;
}

PerturbedSystem build_system(const ScenarioConfig& config) {
  if (config.system.type == "vdp") {
    return config.theorem == "T2" ? vdp_one_term(config.integration) : vdp_two_term(config.integration);
  }
  const SystemSpec& s = config.system;
  const int n = static_cast<int>(s.psi.size());
  const double period = Expr::parse(s.period, {}).eval({});
  auto psi = std::make_shared<ExprField>(s.psi, n);
  auto phi1 = std::make_shared<ExprField>(s.phi1, n);
  auto phi2 = std::make_shared<ExprField>(s.phi2, n);
  FieldEval psi_field([psi](double t, const Vector& x) { return psi->eval(t, x); },
                      [psi](double t, const Vector& x) { return psi->jacobian(t, x); });
  FieldEval phi1_field([phi1](double t, const Vector& x) { return phi1->eval(t, x); },
                       [phi1](double t, const Vector& x) { return phi1->jacobian(t, x); });
  Forcing forcing;
  forcing.f = [phi2](double t, const Vector& x, double eps, double mu) { return phi2->eval(t, x, eps, mu); };
  forcing.jac = [phi2](double t, const Vector& x, double eps, double mu) { return phi2->jacobian(t, x, eps, mu); };
  PerturbedSystem sys = s.profile == "one_term"
                            ? make_one_term(n, period, psi_field, forcing, config.integration)
                            : make_two_term(n, period, psi_field, phi1_field, forcing, config.integration);
  const double defect = periodicity_defect(sys);
  if (defect > 1e-12) {
    std::cerr << "warning: fields are not " << period << "-periodic on the probe set (defect " << defect << ")\n";
  }
  return sys;
}

namespace {

CertificateOptions certificate_options(const ScenarioConfig& config) {
  CertificateOptions opts;
  opts.conditions.s_grid_size = config.s_samples;
  opts.conditions.thresholds = config.thresholds;
  return opts;
}

VerifyOptions verify_options(const ScenarioConfig& config) {
  VerifyOptions opts;
  opts.time_samples = config.time_samples;
  return opts;
}

void add_certificate(RunReport& report, const std::string& name, const Certificate& cert) {
  report.certificates.push_back(summarize(name, cert));
  auto rows = margin_rows(name, cert);
  report.margins.insert(report.margins.end(), rows.begin(), rows.end());
}

void add_scan(RunReport& report, const MuScanResult& scan) {
  report.has_mu_scan = true;
  for (const auto& row : scan.rows) {
    report.mu_scan.push_back(
        {row.mu, row.certificate.valid, row.matches_base, row.a3_min_gap, row.a4_min_gap, row.degree_difference});
  }
  report.mu_hat = scan.mu_hat;
  report.mu_grid_step = scan.grid_step;
  report.mu_range_label = "frequency pulling range";
}

void add_verification(RunReport& report, const ScenarioConfig& config, const std::string& name,
                      const Certificate& cert, const PerturbedSystem& sys, std::optional<double> mu) {
  std::vector<double> engine;
  for (double e : config.epsilons) {
    engine.push_back(to_engine(config, e));
  }
  auto rows = verify_certificate(cert, sys, engine, mu, seed_guesses(cert), verify_options(config));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].epsilon = config.epsilons[i];
    report.verification.push_back(summarize(name, rows[i]));
  }
}

}  // namespace

RunReport run_vdp_scenario(const ScenarioConfig& config) {
  config.validate();
  RunReport report;
  report.config = config.to_json();
  report.config["normal_form"] = normal_form_echo(config.epsilons);

  const CertificateOptions opts = certificate_options(config);
  const int m = config.boundary_samples;
  const double delta = config.delta;

  const PerturbedSystem one = vdp_one_term(config.integration);
  const PlanarRegion ring = PlanarRegion::annulus(Point2::Zero(), 2.0 - delta, 2.0 + delta, m);
  add_certificate(report, "one_term_annulus", assess_theorem2(one, ring, opts));

  const PerturbedSystem two = vdp_two_term(config.integration);
  const PlanarRegion u0 = PlanarRegion::disc(Point2::Zero(), 2.0, m);
  const MuScanResult scan = theorem4_scan(two, u0, delta, config.mu_grid, opts);
  add_certificate(report, "two_term_annulus", scan.base);
  add_scan(report, scan);

  for (double mu : config.mu_verify) {
    add_verification(report, config, "two_term_annulus", scan.base, two, mu);
  }
  report.headline_valid = scan.base.valid;
  return report;
}

RunReport run_vdp_scenario(const std::vector<double>& eps_physical, const std::vector<double>& mu_grid,
                           double delta) {
  ScenarioConfig config = ScenarioConfig::vdp_defaults();
  config.epsilons = eps_physical;
  config.mu_grid = mu_grid;
  config.delta = delta;
  return run_vdp_scenario(config);
}

RunReport run_scenario(const ScenarioConfig& config) {
  if (config.system.type == "vdp") {
    return run_vdp_scenario(config);
  }
  config.validate();
  RunReport report;
  report.config = config.to_json();
  const PerturbedSystem sys = build_system(config);
  const PlanarRegion region = config.region.build(config.boundary_samples);
  const CertificateOptions opts = certificate_options(config);
  const TheoremId id = theorem_from_string(config.theorem);

  Certificate headline;
  switch (id) {
    case TheoremId::T1:
      headline = assess_theorem1(sys, region, opts);
      break;
    case TheoremId::T2:
      headline = assess_theorem2(sys, region, opts);
      break;
    case TheoremId::T3:
    case TheoremId::T4:
      headline = assess_theorem3(sys, region, config.delta, opts);
      break;
  }
  if (id == TheoremId::T4 && headline.valid) {
    const MuScanResult scan = theorem4_scan(sys, region, config.delta, config.mu_grid, opts);
    headline = scan.base;
    add_scan(report, scan);
  }
  add_certificate(report, "headline", headline);
  if (headline.valid) {
    if (id == TheoremId::T4) {
      for (double mu : config.mu_verify) {
        add_verification(report, config, "headline", headline, sys, mu);
      }
    } else {
      add_verification(report, config, "headline", headline, sys, std::nullopt);
    }
  }
  report.headline_valid = headline.valid;
  return report;
}

}  // namespace perdeg
