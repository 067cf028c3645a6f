// Command line front end: analyze a config, run the van der Pol benchmark,
// compute a planar degree, or scan detuning values.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "perdeg/expr.hpp"
#include "perdeg/scenario.hpp"

namespace {

using perdeg::RunReport;
using perdeg::ScenarioConfig;

constexpr int kExitValid = 0;
constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) {
      continue;
    }
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw perdeg::ConfigError("bad number '" + item + "' in list '" + text + "'");
    }
  }
  return out;
}

// "lo:hi:step" or a comma list.
std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) {
    return parse_list(text);
  }
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    parts.push_back(std::stod(item));
  }
  if (parts.size() != 3) {
    throw perdeg::ConfigError("grid '" + text + "' must be lo:hi:step");
  }
  return perdeg::uniform_grid(parts[0], parts[1], parts[2]);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int finish(const RunReport& report, const ScenarioConfig& config, std::chrono::steady_clock::time_point start) {
  const double seconds = seconds_since(start);
  perdeg::emit_report(report, config.output_dir, config.formats);
  std::fprintf(stderr, "elapsed %.2f s\n", seconds);
  for (const auto& c : report.certificates) {
    std::printf("%-17s %s valid=%s degree=%d\n", c.name.c_str(), c.theorem.c_str(), c.valid ? "yes" : "no",
                c.predicted_degree);
    for (const auto& f : c.failures) {
      std::printf("  failure: %s\n", f.c_str());
    }
  }
  if (report.has_mu_scan) {
    std::printf("%s: |mu| <= %s (grid step %s)\n", report.mu_range_label.c_str(),
                perdeg::format_double(report.mu_hat).c_str(), perdeg::format_double(report.mu_grid_step).c_str());
  }
  for (const auto& v : report.verification) {
    std::printf("verify eps=%s mu=%s %s amplitude=%s\n", perdeg::format_double(v.epsilon).c_str(),
                perdeg::format_double(v.mu).c_str(), v.conclusion.c_str(),
                perdeg::format_double(v.amplitude).c_str());
  }
  std::printf("output written to %s\n", config.output_dir.c_str());
  return report.headline_valid ? kExitValid : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degree certificates for periodic solutions of perturbed ODEs"};
  app.require_subcommand(1);

  std::string config_path;
  auto* analyze = app.add_subcommand("analyze", "Run the scenario described by a JSON config");
  analyze->add_option("--config", config_path, "Scenario config file")->required();

  std::string vdp_config;
  double delta = 1.0;
  std::string eps_text;
  std::string mu_grid_text;
  std::string mu_verify_text;
  std::string out_dir;
  auto* vdp = app.add_subcommand("vdp", "Forced van der Pol benchmark");
  vdp->add_option("--config", vdp_config, "Optional config overriding the defaults");
  auto* delta_opt = vdp->add_option("--delta", delta, "Annulus half width, in (0, 2)");
  vdp->add_option("--eps", eps_text, "Physical epsilons, comma separated");
  vdp->add_option("--mu-grid", mu_grid_text, "Detuning grid, lo:hi:step or a comma list");
  vdp->add_option("--mu-verify", mu_verify_text, "Detuning values for shooting, comma separated");
  vdp->add_option("--out", out_dir, "Output directory");

  std::string map_text;
  std::string region_text;
  int samples = 256;
  auto* degree = app.add_subcommand("degree", "Brouwer degree of a planar map over a region");
  degree->add_option("--map", map_text, "Two expressions in x1, x2 separated by ';'")->required();
  degree->add_option("--region", region_text, "disc:cx,cy,r or annulus:cx,cy,rin,rout")->required();
  degree->add_option("--samples", samples, "Boundary samples per curve");

  std::string scan_config;
  std::string scan_grid;
  auto* scan = app.add_subcommand("scan-mu", "Detuning scan for the configured system");
  scan->add_option("--config", scan_config, "Scenario config (defaults to the van der Pol benchmark)");
  scan->add_option("--mu-grid", scan_grid, "Detuning grid, lo:hi:step or a comma list");
  scan->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  try {
    if (*analyze) {
      const ScenarioConfig config = ScenarioConfig::load(config_path);
      return finish(perdeg::run_scenario(config), config, start);
    }
    if (*vdp) {
      ScenarioConfig config = vdp_config.empty() ? ScenarioConfig::vdp_defaults() : ScenarioConfig::load(vdp_config);
      if (config.system.type != "vdp") {
        throw perdeg::ConfigError("the vdp subcommand needs a vdp system config");
      }
      if (delta_opt->count() > 0) {
        config.delta = delta;
      }
      if (!eps_text.empty()) {
        config.epsilons = parse_list(eps_text);
      }
      if (!mu_grid_text.empty()) {
        config.mu_grid = parse_grid(mu_grid_text);
      }
      if (!mu_verify_text.empty()) {
        config.mu_verify = parse_list(mu_verify_text);
      }
      if (!out_dir.empty()) {
        config.output_dir = out_dir;
      }
      config.validate();
      return finish(perdeg::run_vdp_scenario(config), config, start);
    }
    if (*degree) {
      const auto sep = map_text.find(';');
      if (sep == std::string::npos) {
        throw perdeg::ConfigError("--map needs two expressions separated by ';'");
      }
      const perdeg::ExprField field({map_text.substr(0, sep), map_text.substr(sep + 1)}, 2);
      const perdeg::PlanarRegion region = perdeg::RegionSpec::parse(region_text).build(samples);
      const perdeg::PlanarMap map = [&field](const perdeg::Point2& p) -> perdeg::Point2 {
        const perdeg::Vector v = field.eval(0.0, perdeg::Vector(p));
        return {v[0], v[1]};
      };
      const perdeg::DegreeResult r = perdeg::region_degree(map, region);
      std::printf("degree %d\nboundary_margin %s\nsamples_used %d\nrefinements %d\n", r.degree,
                  perdeg::format_double(r.boundary_margin).c_str(), r.samples_used, r.refinements);
      return kExitValid;
    }
    if (*scan) {
      ScenarioConfig config =
          scan_config.empty() ? ScenarioConfig::vdp_defaults() : ScenarioConfig::load(scan_config);
      config.theorem = "T4";
      config.mu_verify.clear();
      if (!scan_grid.empty()) {
        config.mu_grid = parse_grid(scan_grid);
      }
      if (!out_dir.empty()) {
        config.output_dir = out_dir;
      }
      return finish(perdeg::run_scenario(config), config, start);
    }
  } catch (const perdeg::ZeroOnBoundary& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitInvalid;
  } catch (const perdeg::BaseCaseInvalid& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitInvalid;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kExitError;
  }
  return kExitError;
}
