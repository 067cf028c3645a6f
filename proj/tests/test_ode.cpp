#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "fixtures.hpp"

using namespace perdeg;
using fx::vec;

TEST_CASE("rotation quarter turn") {
  const Trajectory tr = integrate(fx::rotation_field(), 0.0, kPi / 2.0, vec(1.0, 0.0));
  CHECK((tr.final_state() - vec(0.0, -1.0)).norm() < 1e-9);
  CHECK(tr.t_begin() == 0.0);
  CHECK(tr.t_end() == kPi / 2.0);
}

TEST_CASE("zero field keeps the state exactly") {
  for (auto [t0, t1] : {std::pair{0.0, 5.0}, std::pair{3.0, -4.0}, std::pair{1.0, 1.0}}) {
    const Trajectory tr = integrate(fx::zero_field(), t0, t1, vec(3.0, -2.0));
    CHECK(tr.final_state()[0] == 3.0);
    CHECK(tr.final_state()[1] == -2.0);
  }
}

TEST_CASE("cubic field against a tightened-tolerance reference") {
  const Vector x0 = vec(0.5, 0.0);
  const Vector x = integrate(fx::cubic_field(), 0.0, 1.0, x0).final_state();
  const Vector ref = integrate(fx::cubic_field(), 0.0, 1.0, x0, {1e-12, 1e-12}).final_state();
  CHECK((x - ref).norm() < 1e-9);
}

TEST_CASE("backward integration inverts forward integration") {
  const Tolerances tol;
  for (const Vector& x0 : {vec(0.5, 0.0), vec(-0.3, 0.4), vec(0.1, -0.6)}) {
    const Vector x1 = integrate(fx::cubic_field(), 0.0, 3.0, x0).final_state();
    const Vector back = integrate(fx::cubic_field(), 3.0, 0.0, x1).final_state();
    CHECK((back - x0).norm() <= 10.0 * (tol.abs_tol + tol.rel_tol * x0.norm()));
  }
}

TEST_CASE("tightening tolerances shrinks the endpoint error") {
  const Vector x0 = vec(0.5, 0.1);
  const Vector ref = integrate(fx::cubic_field(), 0.0, 4.0, x0, {1e-14, 1e-14}).final_state();
  double previous = 0.0;
  bool first = true;
  for (double tol : {1e-5, 1e-5 / 16.0, 1e-5 / 256.0}) {
    const double err = (integrate(fx::cubic_field(), 0.0, 4.0, x0, {tol, tol}).final_state() - ref).norm();
    if (!first) {
      CHECK(err * 4.0 <= previous);
    }
    previous = err;
    first = false;
  }
}

TEST_CASE("dense output reproduces grid states and interpolates smoothly") {
  const Trajectory tr = integrate(fx::rotation_field(), 0.0, 2.0 * kPi, vec(1.0, 0.5));
  REQUIRE(tr.steps() > 4);
  for (std::size_t k = 0; k < tr.grid().size(); ++k) {
    const Vector at = tr.at(tr.grid()[k]);
    CHECK(at[0] == tr.states()[k][0]);
    CHECK(at[1] == tr.states()[k][1]);
  }
  for (double t : {0.1, 1.3, 2.7, 4.4, 6.0}) {
    const Eigen::Vector2d exact = fx::rot(t) * Eigen::Vector2d(1.0, 0.5);
    CHECK((tr.at(t) - Vector(exact)).norm() < 1e-8);
  }
  CHECK_THROWS_AS((void)tr.at(7.0), std::out_of_range);
}

TEST_CASE("grid is strictly monotone in either direction") {
  for (double t1 : {3.0, -3.0}) {
    const Trajectory tr = integrate(fx::cubic_field(), 0.0, t1, vec(0.4, 0.2));
    for (std::size_t k = 1; k < tr.grid().size(); ++k) {
      if (t1 > 0) {
        CHECK(tr.grid()[k] > tr.grid()[k - 1]);
      } else {
        CHECK(tr.grid()[k] < tr.grid()[k - 1]);
      }
    }
  }
}

TEST_CASE("integrator errors") {
  SUBCASE("finite-time blow-up underflows the step size") {
    const FieldEval blow([](double, const Vector& x) -> Vector { return x.cwiseProduct(x); });
    CHECK_THROWS_AS((void)integrate(blow, 0.0, 2.0, Vector::Ones(1)), StepSizeUnderflow);
  }
  SUBCASE("non-finite field values abort") {
    const FieldEval bad([](double t, const Vector& x) -> Vector {
      return t > 0.5 ? Vector::Constant(x.size(), std::nan("")) : Vector(x);
    });
    CHECK_THROWS_AS((void)integrate(bad, 0.0, 1.0, Vector::Ones(2)), NonFiniteState);
  }
  SUBCASE("tolerances outside the supported range") {
    CHECK_THROWS_AS((void)integrate(fx::rotation_field(), 0.0, 1.0, vec(1, 0), {1e-15, 1e-10}), std::invalid_argument);
    CHECK_THROWS_AS((void)integrate(fx::rotation_field(), 0.0, 1.0, vec(1, 0), {1e-10, 0.1}), std::invalid_argument);
  }
}

TEST_CASE("variational equation of the rotation is the rotation matrix") {
  for (double t : {0.7, 2.0, -1.5}) {
    const auto [tr, fp] = integrate_with_variational(fx::rotation_field(), 0.0, t, vec(0.3, 1.1));
    CHECK((fp.final_matrix() - Matrix(fx::rot(t))).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((fp.matrix(0) - Matrix::Identity(2, 2)).norm() == 0.0);
    CHECK(fp.grid().size() == tr.grid().size());
  }
}

TEST_CASE("variational equation at t1 = t0 is the identity") {
  const auto [tr, fp] = integrate_with_variational(fx::cubic_field(), 1.0, 1.0, vec(0.3, 0.2));
  CHECK(fp.final_matrix() == Matrix::Identity(2, 2));
  CHECK(tr.final_state() == vec(0.3, 0.2));
}

TEST_CASE("variational columns match finite differences of the flow") {
  const double eps = 0.2;
  const FieldEval field(
      [eps](double, const Vector& x) -> Vector { return Vector{{x[1], -x[0] + eps * (1.0 - x[0] * x[0]) * x[1]}}; });
  const Vector x0 = vec(1.2, -0.4);
  const auto [tr, fp] = integrate_with_variational(field, 0.0, 1.0, x0);
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Vector e = Vector::Zero(2);
    e[j] = h;
    const Vector plus = integrate(field, 0.0, 1.0, x0 + e, {1e-12, 1e-12}).final_state();
    const Vector minus = integrate(field, 0.0, 1.0, x0 - e, {1e-12, 1e-12}).final_state();
    const Vector column = (plus - minus) / (2.0 * h);
    CHECK((column - fp.final_matrix().col(j)).norm() < 1e-5);
  }
}

TEST_CASE("linear fields: fundamental matrix equals the matrix exponential on the grid") {
  Eigen::Matrix2d a;
  a << -0.1, 1.3, -0.8, 0.2;
  const FieldEval field([a](double, const Vector& x) -> Vector { return a * x; });
  const auto [tr, fp] = integrate_with_variational(field, 0.0, 3.0, vec(1.0, 2.0));
  for (std::size_t k = 0; k < fp.grid().size(); ++k) {
    const Eigen::Matrix2d expected = (a * fp.grid()[k]).exp();
    CHECK((fp.matrix(k) - Matrix(expected)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("finite-difference Jacobian fallback and consistency check") {
  const FieldEval no_jac([](double, const Vector& x) -> Vector { return Vector{{x[1] * x[0], std::sin(x[0])}}; });
  const Matrix j = no_jac.jacobian(0.0, vec(0.5, 2.0));
  CHECK(j(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(j(0, 1) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(j(1, 0) == doctest::Approx(std::cos(0.5)).epsilon(1e-8));
  CHECK(std::abs(j(1, 1)) < 1e-12);
  CHECK(jacobian_consistency(fx::cubic_field(), 2, 32, 2.0, 6.0) < 1e-4);
  const FieldEval wrong(fx::cubic_field().f, [](double, const Vector&) -> Matrix { return Matrix::Identity(2, 2); });
  CHECK(jacobian_consistency(wrong, 2, 32, 2.0, 6.0) > 1e-1);
}

TEST_CASE("flatten and unflatten are column-major inverses") {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  const Vector v = flatten(m);
  CHECK(v[1] == 3.0);
  CHECK(unflatten(v, 2) == m);
}
