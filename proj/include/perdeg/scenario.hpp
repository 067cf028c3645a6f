#pragma once

#include <string>
#include <vector>

#include "perdeg/expr.hpp"
#include "perdeg/report.hpp"

namespace perdeg {

/// Forced van der Pol in normal form:
///   psi = (x2, -x1), phi1 = (0, (1 - x1^2) x2), phi2 = (0, -sin t), T = 2 pi.
/// Physical epsilon e maps to the engine parameter sqrt(e), so that
/// engine^2 = e and engine^3 = e sqrt(e).
[[nodiscard]] PerturbedSystem vdp_two_term(Tolerances tol = {});
/// Unforced van der Pol with the single perturbation phi = (0, (1 - x1^2) x2) at power eps.
[[nodiscard]] PerturbedSystem vdp_one_term(Tolerances tol = {});
[[nodiscard]] double engine_epsilon(double eps_physical);

struct RegionSpec {
  std::string type = "disc";  // disc | annulus | samples
  Point2 center = Point2::Zero();
  double radius = 2.0;
  double r_in = 1.0;
  double r_out = 3.0;
  std::vector<Point2> points;  // samples: counterclockwise polygon vertices

  [[nodiscard]] PlanarRegion build(int samples) const;
  [[nodiscard]] json to_json() const;
  static RegionSpec from_json(const json& j);
  /// "disc:cx,cy,r" | "annulus:cx,cy,rin,rout"
  static RegionSpec parse(const std::string& text);
};

struct SystemSpec {
  std::string type = "vdp";         // vdp | custom
  std::string profile = "two_term";  // two_term | one_term
  std::string period = "2*pi";       // expression without variables
  std::vector<std::string> psi;
  std::vector<std::string> phi1;
  std::vector<std::string> phi2;
  std::string epsilon_scale = "sqrt";  // sqrt: listed epsilons are physical; engine: used as is

  [[nodiscard]] json to_json() const;
  static SystemSpec from_json(const json& j);
};

struct ScenarioConfig {
  SystemSpec system;
  RegionSpec region;
  std::string theorem = "T4";
  double delta = 1.0;
  int boundary_samples = 256;
  int s_samples = 16;
  int time_samples = 128;
  Tolerances integration;
  Thresholds thresholds;
  std::vector<double> epsilons{0.01, 0.05, 0.1};
  std::vector<double> mu_grid;
  std::vector<double> mu_verify{-0.1, 0.0, 0.1};
  std::string output_dir = "perdeg_out";
  std::vector<std::string> formats{"json", "csv"};

  [[nodiscard]] json to_json() const;
  /// Missing keys keep their defaults. Throws ConfigError on malformed input.
  static ScenarioConfig from_json(const json& j);
  static ScenarioConfig load(const std::string& path);
  /// delta = 1, eps in {0.01, 0.05, 0.1}, mu grid -0.5..0.5 step 0.05.
  static ScenarioConfig vdp_defaults();
  void validate() const;
};

/// Builds the system described by a config (builtin or expression based).
[[nodiscard]] PerturbedSystem build_system(const ScenarioConfig& config);
[[nodiscard]] double to_engine(const ScenarioConfig& config, double eps);

/// Certificates, scan and verification for the configured theorem.
[[nodiscard]] RunReport run_scenario(const ScenarioConfig& config);

/// The van der Pol benchmark: one-term annulus certificate, the two-term
/// annulus certificate with its mu scan, and shooting verification.
[[nodiscard]] RunReport run_vdp_scenario(const std::vector<double>& eps_physical, const std::vector<double>& mu_grid,
                                         double delta);
[[nodiscard]] RunReport run_vdp_scenario(const ScenarioConfig& config);

}  // namespace perdeg
