#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace perdeg;

namespace {

const RunReport& sample_report() {
  static const RunReport report = [] {
    ScenarioConfig c = ScenarioConfig::vdp_defaults();
    c.boundary_samples = 64;
    c.s_samples = 8;
    c.epsilons = {0.05, 0.1};
    c.mu_grid = {-0.3, 0.0, 0.1};
    c.mu_verify = {0.0};
    return run_vdp_scenario(c);
  }();
  return report;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2.0");
  CHECK(format_double(-0.0) == "-0.0");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("json dump is sorted and stable") {
  const json j = {{"b", 1.5}, {"a", {{"z", true}, {"y", json::array()}}}, {"c", "x"}, {"n", 3}};
  const std::string text = dump_json(j);
  CHECK(text ==
        "{\n  \"a\": {\n    \"y\": [],\n    \"z\": true\n  },\n  \"b\": 1.5,\n  \"c\": \"x\",\n  \"n\": 3\n}\n");
  CHECK(json::parse(text) == j);
}

TEST_CASE("report round trip") {
  const RunReport& r = sample_report();
  const RunReport back = report_from_json(json::parse(dump_json(to_json(r))));
  CHECK(back == r);
  CHECK(dump_json(to_json(back)) == dump_json(to_json(r)));
}

TEST_CASE("csv schemas") {
  const RunReport& r = sample_report();
  CHECK(first_line(verify_csv(r)) == "epsilon,mu,found,residual,amplitude,in_region");
  CHECK(first_line(mu_scan_csv(r)) == "mu,valid,matches_base,a3_min_gap,a4_min_gap,degree_difference");
  CHECK(first_line(margins_csv(r)) ==
        "certificate,boundary,curve,theta,xi1,xi2,a1_defect,eta1_gap_max,eta1_gap_min,eta2_gap_min,s_collapsed");
  const std::string v = verify_csv(r);
  CHECK(std::count(v.begin(), v.end(), '\n') == 1 + static_cast<long>(r.verification.size()));
  const std::string m = margins_csv(r);
  CHECK(std::count(m.begin(), m.end(), '\n') == 1 + static_cast<long>(r.margins.size()));
  CHECK(r.margins.size() == 64 * 2 + 64 * 2);
}

TEST_CASE("empty mu grid emits an empty array") {
  RunReport r;
  r.has_mu_scan = true;
  const json j = to_json(r);
  REQUIRE(j.contains("mu_scan"));
  CHECK(j.at("mu_scan").is_array());
  CHECK(j.at("mu_scan").empty());
  CHECK(dump_json(j).find("\"mu_scan\": []") != std::string::npos);
  CHECK(first_line(mu_scan_csv(r)) == "mu,valid,matches_base,a3_min_gap,a4_min_gap,degree_difference");
}

TEST_CASE("emit writes every requested file byte for byte") {
  const auto dir = std::filesystem::temp_directory_path() / "perdeg_report_test";
  std::filesystem::remove_all(dir);
  const RunReport& r = sample_report();
  emit_report(r, dir.string(), {"json", "csv"});
  CHECK(slurp(dir / "report.json") == dump_json(to_json(r)));
  CHECK(slurp(dir / "verify.csv") == verify_csv(r));
  CHECK(slurp(dir / "mu_scan.csv") == mu_scan_csv(r));
  CHECK(slurp(dir / "margins.csv") == margins_csv(r));
  const std::string json_text = slurp(dir / "report.json");
  CHECK(json_text.find('\r') == std::string::npos);
  CHECK(json_text.back() == '\n');
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(emit_report(r, dir.string(), {"xml"}), std::invalid_argument);
  CHECK_THROWS_AS(emit_report(r, "/proc/perdeg/nope", {"json"}), std::runtime_error);
}

TEST_CASE("identical configs give identical reports") {
  ScenarioConfig c = ScenarioConfig::vdp_defaults();
  c.boundary_samples = 64;
  c.s_samples = 8;
  c.epsilons = {0.05, 0.1};
  c.mu_grid = {-0.3, 0.0, 0.1};
  c.mu_verify = {0.0};
  CHECK(dump_json(to_json(run_vdp_scenario(c))) == dump_json(to_json(sample_report())));
}

TEST_CASE("summaries carry raw margins") {
  const RunReport& r = sample_report();
  const CertificateEntry& prop2 = r.certificates.at(1);
  CHECK(prop2.theorem == "T4");
  REQUIRE(prop2.conditions.size() == 2);
  CHECK(prop2.conditions[0].label == "boundary U0");
  CHECK(prop2.conditions[0].a3_min_gap > 3.0);
  CHECK(prop2.conditions[0].required == std::vector<std::string>{"A1", "A2", "A3"});
  CHECK(prop2.degrees.size() == 2);
  CHECK(r.verification.size() == 2);
  CHECK(r.verification[0].certificate == "two_term_annulus");
}
