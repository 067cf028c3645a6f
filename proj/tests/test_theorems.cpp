#include <doctest.h>

#include "fixtures.hpp"

using namespace perdeg;
using fx::vec;

namespace {

CertificateOptions small_grid(int s = 8) {
  CertificateOptions o;
  o.conditions.s_grid_size = s;
  return o;
}

PlanarRegion disc(double r, int m = 64) { return PlanarRegion::disc(Point2::Zero(), r, m); }

// rotation + eps^3 * (x1, x2): eta2(2 pi, 0, xi) = 2 pi xi.
PerturbedSystem radial_forcing_system() {
  return fx::rotation_system(fx::zero_field(),
                             fx::forcing_of([](double, const Vector& x) -> Vector { return x; }));
}

// Forcing whose transported full-period mean vanishes.
PerturbedSystem zero_gap_system() {
  return fx::rotation_system(fx::vdp_two_term_damping(),
                             fx::forcing_of([](double t, const Vector&) -> Vector {
                               return Vector{{0.0, -std::sin(2.0 * t)}};
                             }));
}

}  // namespace

TEST_CASE("anchor grid") {
  const auto g = anchor_grid(2.0 * kPi, 9);
  CHECK(g.size() == 9);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 2.0 * kPi);
  CHECK(g[4] == doctest::Approx(kPi));
}

TEST_CASE("check_conditions examples") {
  const ConditionReport rot = check_conditions(fx::rotation_system(), disc(2.0));
  CHECK(rot.a1_max_defect <= 1e-9);
  const ConditionReport vdp = check_conditions(vdp_two_term(), disc(2.0));
  CHECK(vdp.a2_max_gap <= 1e-8);
  CHECK(vdp.a3_min_gap > 1.0);
  CHECK(vdp.pass_a1());
  CHECK(vdp.pass_a2());
  CHECK(vdp.pass_a3());
  CHECK(vdp.boundary_samples == 64);
  CHECK(vdp.collapsed_samples == 64);
  CHECK(vdp.a3_min_gap == doctest::Approx(fx::vdp_forcing_gap_oracle().norm()).epsilon(1e-9));
}

TEST_CASE("check_conditions preconditions") {
  ConditionOptions o;
  o.s_grid_size = 4;
  CHECK_THROWS_AS((void)check_conditions(vdp_two_term(), disc(2.0), o), std::invalid_argument);
  CHECK_THROWS_AS((void)check_conditions(vdp_two_term(), disc(2.0, 32)), std::invalid_argument);
}

TEST_CASE("margins are nonnegative and pass flags follow the thresholds") {
  ConditionOptions o;
  o.thresholds.tol_eq = 1e-20;
  o.thresholds.floor_neq = 10.0;
  const ConditionReport r = check_conditions(vdp_two_term(), disc(1.5), o);
  CHECK(r.a1_max_defect >= 0.0);
  CHECK(r.a2_max_gap >= 0.0);
  CHECK_FALSE(r.pass_a1());
  CHECK_FALSE(r.pass_a2());
  CHECK_FALSE(r.pass_a3());
}

TEST_CASE("grid monotonicity under refinement") {
  ConditionOptions coarse;
  coarse.s_grid_size = 9;
  coarse.allow_s_collapse = false;
  ConditionOptions fine = coarse;
  fine.s_grid_size = 17;
  const PerturbedSystem sys = vdp_two_term();
  const ConditionReport a = check_conditions(sys, disc(1.7, 64), coarse);
  const ConditionReport b = check_conditions(sys, disc(1.7, 128), fine);
  CHECK(b.a3_min_gap <= a.a3_min_gap);
  CHECK(b.a1_max_defect >= a.a1_max_defect);
  CHECK(b.a2_max_gap >= a.a2_max_gap);
  CHECK(a.collapsed_samples == 0);
}

TEST_CASE("theorem 1 certificates") {
  SUBCASE("van der Pol two-term over U0") {
    const Certificate c = theorem1_certificate(vdp_two_term(), disc(2.0), small_grid());
    CHECK(c.valid);
    CHECK(c.predicted_degree == 0);
    CHECK(c.theorem == TheoremId::T1);
  }
  SUBCASE("constant nonzero gap") {
    const PerturbedSystem sys = fx::rotation_system(
        fx::zero_field(), fx::forcing_of([](double t, const Vector&) -> Vector { return Vector{{std::cos(t), 0.0}}; }));
    const Certificate c = theorem1_certificate(sys, PlanarRegion::disc(Point2(0.4, -1.0), 1.3, 64), small_grid());
    CHECK(c.predicted_degree == 0);
  }
  SUBCASE("radial forcing gives degree 1 on the unit disc") {
    const PerturbedSystem sys = radial_forcing_system();
    const Certificate c = theorem1_certificate(sys, disc(1.0), small_grid());
    CHECK(c.valid);
    CHECK(c.predicted_degree == 1);
    CHECK(c.reports.front().report.a3_min_gap == doctest::Approx(2.0 * kPi).epsilon(1e-9));
  }
  SUBCASE("failing hypotheses throw with the report attached") {
    try {
      (void)theorem1_certificate(zero_gap_system(), disc(2.0), small_grid());
      FAIL("expected ConditionsFailed");
    } catch (const ConditionsFailed& ex) {
      CHECK_FALSE(ex.certificate().valid);
      REQUIRE(ex.certificate().failures.size() == 1);
      CHECK(ex.certificate().failures.front().find("A3") != std::string::npos);
      CHECK(ex.certificate().reports.front().report.a3_min_gap < 1e-8);
    }
    const Certificate soft = assess_theorem1(zero_gap_system(), disc(2.0), small_grid());
    CHECK_FALSE(soft.valid);
    CHECK(soft.degrees.empty());
  }
}

TEST_CASE("(A2) consistency: eta2(T,0,.) and the gap map give the same degree") {
  const PerturbedSystem sys = radial_forcing_system();
  const Certificate c = theorem1_certificate(sys, disc(1.0), small_grid());
  const PlanarMap gap = [&](const Point2& p) -> Point2 {
    const Vector g = eta_period_gap(sys, 2, 0.0, Vector(p));
    return {g[0], g[1]};
  };
  CHECK(region_degree(gap, disc(1.0)).degree == c.predicted_degree);
}

TEST_CASE("theorem 2 certificates for the unforced van der Pol") {
  const PerturbedSystem one = vdp_one_term();
  const Certificate ring = theorem2_certificate(one, PlanarRegion::annulus(Point2::Zero(), 1.0, 3.0, 64), small_grid());
  CHECK(ring.predicted_degree == 0);
  CHECK(ring.valid);
  CHECK(theorem2_certificate(one, disc(3.0), small_grid()).predicted_degree == 1);
  CHECK(theorem2_certificate(one, disc(1.0), small_grid()).predicted_degree == 1);
  CHECK_THROWS_AS((void)theorem2_certificate(one, disc(2.0), small_grid()), ConditionsFailed);
  CHECK_THROWS_AS((void)theorem2_certificate(vdp_two_term(), disc(1.0)), std::invalid_argument);
  CHECK_THROWS_AS((void)theorem1_certificate(one, disc(1.0)), std::invalid_argument);
}

TEST_CASE("theorem 2 subsumption: a two-term encoding with phi1 = 0") {
  const PerturbedSystem one = vdp_one_term();
  const PerturbedSystem two = make_two_term(2, one.period, one.psi, fx::zero_field(), one.phi2);
  const PlanarRegion ring = PlanarRegion::annulus(Point2::Zero(), 1.0, 3.0, 64);
  const Certificate c1 = theorem1_certificate(two, ring, small_grid());
  const Certificate c2 = theorem2_certificate(one, ring, small_grid());
  CHECK(c1.predicted_degree == c2.predicted_degree);
  CHECK(c1.reports.front().report.a3_min_gap == c2.reports.front().report.a3_min_gap);
  CHECK(c1.reports.front().report.a1_max_defect == c2.reports.front().report.a1_max_defect);
  CHECK(c1.degrees.front().result.boundary_margin == c2.degrees.front().result.boundary_margin);
}

TEST_CASE("linear center extraction") {
  const LinearCenter c = extract_linear_center(vdp_two_term());
  CHECK(c.lambda == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.period() == doctest::Approx(2.0 * kPi));
  CHECK_THROWS_AS((void)extract_linear_center(fx::cubic_system()), SpectrumMismatch);
  const FieldEval saddle([](double, const Vector& x) -> Vector { return Vector{{x[1], x[0]}}; });
  CHECK_THROWS_AS((void)extract_linear_center(make_two_term(2, 1.0, saddle, fx::zero_field(), fx::zero_forcing())),
                  SpectrumMismatch);
  const FieldEval forced([](double t, const Vector& x) -> Vector { return Vector{{x[1], -x[0] + std::sin(t)}}; });
  CHECK_THROWS_AS((void)extract_linear_center(make_two_term(2, 2 * kPi, forced, fx::zero_field(), fx::zero_forcing())),
                  SpectrumMismatch);
}

TEST_CASE("theorem 3 for the forced van der Pol") {
  const Certificate c = theorem3_certificate(vdp_two_term(), disc(2.0), 1.0, small_grid());
  CHECK(c.valid);
  CHECK(c.predicted_degree == 1);
  REQUIRE(c.degrees.size() == 2);
  CHECK(c.degrees[0].result.degree == 1);
  CHECK(c.degrees[1].result.degree == 0);
  REQUIRE(c.inner.has_value());
  // U_delta is the boundary of U0 scaled by 1 + delta.
  CHECK(c.region.outer(0.25).norm() == doctest::Approx(4.0));
  // (A4) margin on |xi| = 4: |pi - 4 pi| * 4.
  CHECK(c.reports[1].report.a4_min_gap == doctest::Approx(12.0 * kPi).epsilon(1e-8));
}

TEST_CASE("theorem 3 with a zero-gap forcing fails on A3") {
  CHECK_THROWS_AS((void)theorem3_certificate(zero_gap_system(), disc(2.0), 1.0, small_grid()), ConditionsFailed);
  CHECK_THROWS_AS((void)assess_theorem3(vdp_two_term(), disc(2.0), -0.5), std::invalid_argument);
}

TEST_CASE("theorem 3 at lambda = 2 matches the lambda = 1 case") {
  // x(t) = X(2t) turns the lambda = 1 system into psi = 2 A1 x, phi1 -> 2 phi1, phi2 -> 2 phi2(2t).
  const PerturbedSystem base = vdp_two_term();
  const FieldEval psi([](double, const Vector& x) -> Vector { return Vector{{2.0 * x[1], -2.0 * x[0]}}; },
                      [](double, const Vector&) -> Matrix { return Matrix{{0.0, 2.0}, {-2.0, 0.0}}; });
  const FieldEval phi1([base](double t, const Vector& x) -> Vector { return 2.0 * base.phi1(t, x); });
  const Forcing phi2 = fx::forcing_of([](double t, const Vector&) -> Vector { return Vector{{0.0, -2.0 * std::sin(2.0 * t)}}; });
  const PerturbedSystem fast = make_two_term(2, kPi, psi, phi1, phi2);
  const Certificate c1 = theorem3_certificate(base, disc(2.0), 1.0, small_grid());
  const Certificate c2 = theorem3_certificate(fast, disc(2.0), 1.0, small_grid());
  CHECK(c2.period == doctest::Approx(kPi));
  CHECK(c2.predicted_degree == c1.predicted_degree);
  CHECK(c2.reports[0].report.a3_min_gap == doctest::Approx(c1.reports[0].report.a3_min_gap).epsilon(1e-8));
}

TEST_CASE("detuned system adds mu A xi to the forcing gap") {
  const PerturbedSystem sys = vdp_two_term();
  const LinearCenter center = extract_linear_center(sys);
  const double mu = 0.15;
  const PerturbedSystem det = detuned_system(sys, center, mu);
  const Vector xi = vec(1.2, -1.6);
  const Vector expected = fx::vdp_forcing_gap_oracle() + 2.0 * kPi * mu * Vector(center.a * Eigen::Vector2d(xi));
  CHECK((eta_period_gap(det, 2, 0.0, xi) - expected).norm() < 1e-8);
  CHECK((eta_period_gap(det, 1, 0.0, xi) - eta_period_gap(sys, 1, 0.0, xi)).norm() < 1e-12);
}

TEST_CASE("theorem 4 scan") {
  const PerturbedSystem sys = vdp_two_term();
  const std::vector<double> grid{-0.4, -0.2, 0.0, 0.2, 0.4};
  const MuScanResult scan = theorem4_scan(sys, disc(2.0), 1.0, grid, small_grid());
  const Certificate t3 = theorem3_certificate(sys, disc(2.0), 1.0, small_grid());
  CHECK(scan.base.predicted_degree == t3.predicted_degree);
  CHECK(scan.base.reports[0].report.a3_min_gap == t3.reports[0].report.a3_min_gap);
  REQUIRE(scan.rows.size() == grid.size());
  const MuScanRow& zero = scan.rows[2];
  CHECK(zero.matches_base);
  CHECK(zero.degree_difference == 1);
  CHECK(zero.a3_min_gap == t3.reports[0].report.a3_min_gap);
  CHECK(scan.rows[1].matches_base);
  CHECK(scan.rows[3].matches_base);
  CHECK_FALSE(scan.rows[0].matches_base);
  CHECK_FALSE(scan.rows[4].matches_base);
  CHECK(scan.mu_hat == doctest::Approx(0.2));
  CHECK(scan.grid_step == doctest::Approx(0.2));
  // A3 margin on |xi| = 2: | |c| - 4 pi |mu| |.
  const double c = fx::vdp_forcing_gap_oracle().norm();
  for (const MuScanRow& row : scan.rows) {
    CHECK(row.a3_min_gap == doctest::Approx(std::abs(c - 4.0 * kPi * std::abs(row.mu))).epsilon(1e-6));
  }
  CHECK_THROWS_AS((void)theorem4_scan(zero_gap_system(), disc(2.0), 1.0, grid, small_grid()), BaseCaseInvalid);
}

TEST_CASE("empty mu grid still certifies the base") {
  const MuScanResult scan = theorem4_scan(vdp_two_term(), disc(2.0), 1.0, {}, small_grid());
  CHECK(scan.rows.empty());
  CHECK(scan.base.valid);
  CHECK(scan.mu_hat == 0.0);
}

TEST_CASE("uniform grid lands on lattice points") {
  const auto g = uniform_grid(-0.5, 0.5, 0.05);
  CHECK(g.size() == 21);
  CHECK(g[10] == 0.0);
  CHECK(g.front() == doctest::Approx(-0.5));
  CHECK(g.back() == doctest::Approx(0.5));
  CHECK_THROWS_AS((void)uniform_grid(1.0, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("certificate determinism") {
  const Certificate a = theorem3_certificate(vdp_two_term(), disc(2.0), 0.5, small_grid());
  const Certificate b = theorem3_certificate(vdp_two_term(), disc(2.0), 0.5, small_grid());
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    const auto& ra = a.reports[i].report;
    const auto& rb = b.reports[i].report;
    CHECK(ra.a1_max_defect == rb.a1_max_defect);
    CHECK(ra.a2_max_gap == rb.a2_max_gap);
    CHECK(ra.a3_min_gap == rb.a3_min_gap);
    CHECK(ra.a4_min_gap == rb.a4_min_gap);
  }
  CHECK(a.degrees[0].result.boundary_margin == b.degrees[0].result.boundary_margin);
}

TEST_CASE("theorem ids round trip") {
  for (TheoremId id : {TheoremId::T1, TheoremId::T2, TheoremId::T3, TheoremId::T4}) {
    CHECK(theorem_from_string(to_string(id)) == id);
  }
  CHECK_THROWS_AS((void)theorem_from_string("T9"), ConfigError);
}
