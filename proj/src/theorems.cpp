#include "perdeg/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace perdeg {

namespace {

constexpr double kCollapseTol = 1e-9;

Vector to_vector(const Point2& p) { return Vector(p); }
Point2 to_point(const Vector& v) { return Point2(v[0], v[1]); }

PlanarMap response_map(const PerturbedSystem& sys, int which) {
  return [&sys, which](const Point2& xi) -> Point2 {
    return to_point(eta_lemma1(sys, EtaQuery{which, 0.0, sys.period, to_vector(xi)}));
  };
}

void require_planar(const PerturbedSystem& sys) {
  if (sys.n != 2) {
    throw std::invalid_argument("degree certificates are only available for planar systems");
  }
}

bool passes(const ConditionReport& r, const std::string& name) {
  if (name == "A1") return r.pass_a1();
  if (name == "A2") return r.pass_a2();
  if (name == "A3") return r.pass_a3();
  if (name == "A4") return r.pass_a4();
  throw std::logic_error("unknown condition " + name);
}

LabeledReport labeled(const PerturbedSystem& sys, const std::string& label, std::vector<std::string> required,
                      const PlanarRegion& region, const ConditionOptions& options) {
  return LabeledReport{label, std::move(required), check_conditions(sys, region, options)};
}

void collect_failures(Certificate& cert) {
  cert.failures.clear();
  for (const auto& r : cert.reports) {
    for (const auto& name : r.required) {
      if (!passes(r.report, name)) {
        cert.failures.push_back(name + " on " + r.label);
      }
    }
  }
}

}  // namespace

std::vector<double> anchor_grid(double period, int size) {
  if (size == 1) {
    return {0.0};
  }
  std::vector<double> grid(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k) {
    grid[static_cast<std::size_t>(k)] = period * static_cast<double>(k) / static_cast<double>(size - 1);
  }
  grid.back() = period;
  return grid;
}

ConditionReport check_conditions(const PerturbedSystem& sys, const PlanarRegion& region,
                                 const ConditionOptions& options) {
  if (options.s_grid_size < 8) {
    throw std::invalid_argument("check_conditions: s-grid needs at least 8 anchors");
  }
  require_planar(sys);
  std::vector<std::pair<int, double>> where;
  const auto curves = region.curves();
  for (std::size_t c = 0; c < curves.size(); ++c) {
    if (curves[c]->samples < 64) {
      throw std::invalid_argument("check_conditions: boundary needs at least 64 samples");
    }
    for (int k = 0; k < curves[c]->samples; ++k) {
      where.emplace_back(static_cast<int>(c), curves[c]->theta(k));
    }
  }

  const std::vector<double> full_grid = anchor_grid(sys.period, options.s_grid_size);
  std::vector<BoundarySample> samples(where.size());
  parallel_for(where.size(), [&](std::size_t i) {
    BoundarySample& bs = samples[i];
    bs.curve = where[i].first;
    bs.theta = where[i].second;
    bs.xi = (*curves[static_cast<std::size_t>(bs.curve)])(bs.theta);
    const Vector xi = to_vector(bs.xi);
    const auto path = linearization_path(sys, xi);
    bs.a1_defect = (path->final_state() - xi).norm();
    const Matrix id = Matrix::Identity(sys.n, sys.n);
    bs.s_collapsed = options.allow_s_collapse && (path->monodromy() - id).cwiseAbs().maxCoeff() <= kCollapseTol;
    const std::vector<double> grid = bs.s_collapsed ? std::vector<double>{0.0} : full_grid;
    const auto g1 = eta_period_gaps(sys, 1, grid, xi);
    const auto g2 = eta_period_gaps(sys, 2, grid, xi);
    bs.eta1_gap_max = 0.0;
    bs.eta1_gap_min = std::numeric_limits<double>::infinity();
    bs.eta2_gap_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      bs.eta1_gap_max = std::max(bs.eta1_gap_max, g1[k].norm());
      bs.eta1_gap_min = std::min(bs.eta1_gap_min, g1[k].norm());
      bs.eta2_gap_min = std::min(bs.eta2_gap_min, g2[k].norm());
    }
  });

  ConditionReport report;
  report.period = sys.period;
  report.s_grid_size = options.s_grid_size;
  report.boundary_samples = static_cast<int>(samples.size());
  report.thresholds = options.thresholds;
  report.a3_min_gap = std::numeric_limits<double>::infinity();
  report.a4_min_gap = std::numeric_limits<double>::infinity();
  for (const auto& bs : samples) {
    report.a1_max_defect = std::max(report.a1_max_defect, bs.a1_defect);
    report.a2_max_gap = std::max(report.a2_max_gap, bs.eta1_gap_max);
    report.a3_min_gap = std::min(report.a3_min_gap, bs.eta2_gap_min);
    report.a4_min_gap = std::min(report.a4_min_gap, bs.eta1_gap_min);
    report.collapsed_samples += bs.s_collapsed ? 1 : 0;
  }
  report.samples = std::move(samples);
  return report;
}

std::string to_string(TheoremId id) {
  switch (id) {
    case TheoremId::T1: return "T1";
    case TheoremId::T2: return "T2";
    case TheoremId::T3: return "T3";
    case TheoremId::T4: return "T4";
  }
  return "T?";
}

TheoremId theorem_from_string(const std::string& s) {
  if (s == "T1") return TheoremId::T1;
  if (s == "T2") return TheoremId::T2;
  if (s == "T3") return TheoremId::T3;
  if (s == "T4") return TheoremId::T4;
  throw ConfigError("unknown theorem '" + s + "' (expected T1, T2, T3 or T4)");
}

namespace {

std::string describe(const Certificate& cert) {
  std::ostringstream msg;
  msg << to_string(cert.theorem) << " hypotheses failed:";
  for (const auto& f : cert.failures) {
    msg << ' ' << f << ';';
  }
  return msg.str();
}

}  // namespace

ConditionsFailed::ConditionsFailed(Certificate cert) : Error(describe(cert)), cert_(std::move(cert)) {}

Certificate assess_theorem1(const PerturbedSystem& sys, const PlanarRegion& region, const CertificateOptions& options) {
  if (sys.profile != Profile::TwoTerm) {
    throw std::invalid_argument("theorem 1 needs a two-term system");
  }
  require_planar(sys);
  Certificate cert;
  cert.theorem = TheoremId::T1;
  cert.period = sys.period;
  cert.region = region;
  cert.reports.push_back(labeled(sys, "boundary U", {"A1", "A2", "A3"}, region, options.conditions));
  collect_failures(cert);
  if (!cert.failures.empty()) {
    return cert;
  }
  const DegreeResult d = region_degree(response_map(sys, 2), region);
  cert.degrees.push_back({"deg(eta2(T,0,.), U)", d});
  cert.predicted_degree = d.degree;
  cert.valid = d.boundary_margin > 0.0;
  return cert;
}

Certificate assess_theorem2(const PerturbedSystem& sys, const PlanarRegion& region, const CertificateOptions& options) {
  if (sys.profile != Profile::OneTerm) {
    throw std::invalid_argument("theorem 2 needs a one-term system");
  }
  require_planar(sys);
  Certificate cert;
  cert.theorem = TheoremId::T2;
  cert.period = sys.period;
  cert.region = region;
  // The single response occupies slot 2, so its nonvanishing gap is the A3 statistic.
  cert.reports.push_back(labeled(sys, "boundary U", {"A1", "A3"}, region, options.conditions));
  collect_failures(cert);
  if (!cert.failures.empty()) {
    return cert;
  }
  const DegreeResult d = region_degree(response_map(sys, 2), region);
  cert.degrees.push_back({"deg(eta(T,0,.), U)", d});
  cert.predicted_degree = d.degree;
  cert.valid = d.boundary_margin > 0.0;
  return cert;
}

LinearCenter extract_linear_center(const PerturbedSystem& sys) {
  if (sys.n != 2) {
    throw SpectrumMismatch("linear center extraction needs n = 2");
  }
  const Vector origin = Vector::Zero(2);
  const Matrix a = sys.psi.jacobian(0.0, origin);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-3.0, 3.0);
  std::uniform_real_distribution<double> ut(0.0, sys.period);
  for (int p = 0; p < 32; ++p) {
    const Vector x = Vector{{ux(rng), ux(rng)}};
    const double t = ut(rng);
    const Vector lin = a * x;
    if ((sys.psi(t, x) - lin).norm() > 1e-9 * (1.0 + lin.norm())) {
      throw SpectrumMismatch("psi is not an autonomous linear field");
    }
  }
  Eigen::EigenSolver<Matrix> es(a);
  const auto ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].real()) > 1e-10) {
      throw SpectrumMismatch("A has eigenvalues off the imaginary axis");
    }
  }
  const double lambda = std::abs(ev[0].imag());
  if (!(lambda > 0.0) || std::abs(std::abs(ev[1].imag()) - lambda) > 1e-10 ||
      ev[0].imag() * ev[1].imag() >= 0.0) {
    throw SpectrumMismatch("A must have eigenvalues i lambda and -i lambda with lambda > 0");
  }
  LinearCenter center;
  center.a = a;
  center.lambda = lambda;
  return center;
}

Certificate assess_theorem3(const PerturbedSystem& sys, const PlanarRegion& u0, double delta,
                            const CertificateOptions& options) {
  if (sys.profile != Profile::TwoTerm) {
    throw std::invalid_argument("theorem 3 needs a two-term system");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("theorem 3 needs delta > 0");
  }
  const LinearCenter center = extract_linear_center(sys);
  PerturbedSystem local = sys;
  local.period = center.period();
  const PlanarRegion u_delta = u0.scaled(1.0 + delta);

  Certificate cert;
  cert.theorem = TheoremId::T3;
  cert.period = local.period;
  cert.region = u_delta;
  cert.inner = u0;
  cert.delta = delta;
  cert.reports.push_back(labeled(local, "boundary U0", {"A1", "A2", "A3"}, u0, options.conditions));
  cert.reports.push_back(labeled(local, "boundary U_delta", {"A1", "A4"}, u_delta, options.conditions));
  collect_failures(cert);
  if (!cert.failures.empty()) {
    return cert;
  }
  const DegreeResult outer = region_degree(response_map(local, 1), u_delta);
  const DegreeResult inner = region_degree(response_map(local, 2), u0);
  cert.degrees.push_back({"deg(eta1(T,0,.), U_delta)", outer});
  cert.degrees.push_back({"deg(eta2(T,0,.), U0)", inner});
  cert.predicted_degree = outer.degree - inner.degree;
  cert.valid = outer.boundary_margin > 0.0 && inner.boundary_margin > 0.0;
  return cert;
}

Certificate theorem1_certificate(const PerturbedSystem& sys, const PlanarRegion& region,
                                 const CertificateOptions& options) {
  Certificate cert = assess_theorem1(sys, region, options);
  if (!cert.valid) {
    throw ConditionsFailed(std::move(cert));
  }
  return cert;
}

Certificate theorem2_certificate(const PerturbedSystem& sys, const PlanarRegion& region,
                                 const CertificateOptions& options) {
  Certificate cert = assess_theorem2(sys, region, options);
  if (!cert.valid) {
    throw ConditionsFailed(std::move(cert));
  }
  return cert;
}

Certificate theorem3_certificate(const PerturbedSystem& sys, const PlanarRegion& u0, double delta,
                                 const CertificateOptions& options) {
  Certificate cert = assess_theorem3(sys, u0, delta, options);
  if (!cert.valid) {
    throw ConditionsFailed(std::move(cert));
  }
  return cert;
}

PerturbedSystem detuned_system(const PerturbedSystem& sys, const LinearCenter& center, double mu) {
  PerturbedSystem out = sys;
  out.period = center.period();
  const Forcing base = sys.phi2;
  const FieldEval phi1 = sys.phi1;
  const Matrix a = center.a;
  out.phi2.f = [base, phi1, a, mu](double t, const Vector& x, double eps, double) -> Vector {
    const Vector f2 = base(t, x, eps, mu);
    return f2 + mu * (a * x) + eps * eps * mu * phi1(t, x) + eps * eps * eps * mu * f2;
  };
  out.phi2.jac = [base, phi1, a, mu](double t, const Vector& x, double eps, double) -> Matrix {
    const Matrix j2 = base.jacobian(t, x, eps, mu);
    return j2 + mu * a + eps * eps * mu * phi1.jacobian(t, x) + eps * eps * eps * mu * j2;
  };
  // psi and the period are untouched, so linearization paths stay shareable.
  return out;
}

MuScanResult theorem4_scan(const PerturbedSystem& sys, const PlanarRegion& u0, double delta,
                           const std::vector<double>& mu_grid, const CertificateOptions& options) {
  MuScanResult result;
  const LinearCenter center = extract_linear_center(sys);
  result.base = assess_theorem3(detuned_system(sys, center, 0.0), u0, delta, options);
  if (!result.base.valid) {
    throw BaseCaseInvalid("theorem 4 scan: the mu = 0 certificate is invalid");
  }
  result.base.theorem = TheoremId::T4;

  for (double mu : mu_grid) {
    MuScanRow row;
    row.mu = mu;
    row.certificate = mu == 0.0 ? result.base : assess_theorem3(detuned_system(sys, center, mu), u0, delta, options);
    row.certificate.theorem = TheoremId::T4;
    row.certificate.mu = mu;
    row.a3_min_gap = row.certificate.reports.at(0).report.a3_min_gap;
    row.a4_min_gap = row.certificate.reports.at(1).report.a4_min_gap;
    row.degree_computed = row.certificate.valid;
    row.degree_difference = row.certificate.predicted_degree;
    row.matches_base = row.certificate.valid && row.degree_difference == result.base.predicted_degree;
    result.rows.push_back(std::move(row));
  }

  std::vector<double> magnitudes;
  std::vector<double> sorted = mu_grid;
  for (double mu : mu_grid) {
    magnitudes.push_back(std::abs(mu));
  }
  std::sort(magnitudes.begin(), magnitudes.end());
  magnitudes.erase(std::unique(magnitudes.begin(), magnitudes.end()), magnitudes.end());
  result.mu_hat = 0.0;
  for (double m : magnitudes) {
    bool ok = true;
    for (const auto& row : result.rows) {
      if (std::abs(row.mu) == m && !row.matches_base) {
        ok = false;
      }
    }
    if (!ok) {
      break;
    }
    result.mu_hat = m;
  }

  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  result.grid_step = 0.0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double gap = sorted[i] - sorted[i - 1];
    if (result.grid_step == 0.0 || gap < result.grid_step) {
      result.grid_step = gap;
    }
  }
  return result;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) {
    throw std::invalid_argument("uniform_grid: need step > 0 and lo <= hi");
  }
  const double first = std::round(lo / step);
  const bool on_lattice = std::abs(lo / step - first) < 1e-9;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  for (long k = 0; k <= count; ++k) {
    grid.push_back(on_lattice ? (first + static_cast<double>(k)) * step : lo + static_cast<double>(k) * step);
  }
  return grid;
}

}  // namespace perdeg
