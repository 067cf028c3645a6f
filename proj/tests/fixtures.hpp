#pragma once

#include <cmath>
#include <random>

#include "perdeg/scenario.hpp"

namespace fx {

using namespace perdeg;

inline Eigen::Matrix2d rot(double t) {
  Eigen::Matrix2d r;
  r << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
  return r;
}

inline FieldEval rotation_field() {
  return FieldEval([](double, const Vector& x) -> Vector { return Vector{{x[1], -x[0]}}; },
                   [](double, const Vector&) -> Matrix { return Matrix{{0.0, 1.0}, {-1.0, 0.0}}; });
}

// x1' = x2, x2' = -x1 + x1^3
inline FieldEval cubic_field() {
  return FieldEval([](double, const Vector& x) -> Vector { return Vector{{x[1], -x[0] + x[0] * x[0] * x[0]}}; },
                   [](double, const Vector& x) -> Matrix {
                     return Matrix{{0.0, 1.0}, {-1.0 + 3.0 * x[0] * x[0], 0.0}};
                   });
}

inline FieldEval zero_field(int n = 2) {
  return FieldEval([n](double, const Vector&) -> Vector { return Vector::Zero(n); });
}

inline Forcing zero_forcing(int n = 2) {
  Forcing f;
  f.f = [n](double, const Vector&, double, double) -> Vector { return Vector::Zero(n); };
  return f;
}

inline Forcing forcing_of(std::function<Vector(double, const Vector&)> g) {
  Forcing f;
  f.f = [g](double t, const Vector& x, double, double) { return g(t, x); };
  return f;
}

inline PerturbedSystem rotation_system(FieldEval phi1 = zero_field(), Forcing phi2 = zero_forcing()) {
  return make_two_term(2, 2.0 * kPi, rotation_field(), std::move(phi1), std::move(phi2));
}

inline PerturbedSystem cubic_system() {
  return make_two_term(2, 2.0 * kPi, cubic_field(), zero_field(), zero_forcing());
}

inline Vector vec(double a, double b) { return Vector{{a, b}}; }

inline Vector random_point(std::mt19937& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double a = u(rng);
  const double b = u(rng);
  return vec(a, b);
}

// Closed-form eta1 gap of the van der Pol damping: (pi - pi/4 |xi|^2) xi.
inline Vector vdp_eta1_gap(const Vector& xi) { return (kPi - kPi / 4.0 * xi.squaredNorm()) * xi; }

// Periodic trapezoid rule on [0, T] with m nodes; spectrally accurate for
// smooth periodic integrands.
template <typename F>
Vector periodic_trapezoid(F&& g, double period, int m) {
  Vector sum = g(0.0) * 0.0;
  for (int k = 0; k < m; ++k) {
    sum += g(period * k / m);
  }
  return sum * (period / m);
}

// Forcing gap constant for phi2 = (0, -sin t) along the rotation flow:
// int_0^{2 pi} R(-tau) (0, -sin tau) dtau.
inline Vector vdp_forcing_gap_oracle() {
  return periodic_trapezoid(
      [](double tau) -> Vector {
        const Eigen::Vector2d v = rot(-tau) * Eigen::Vector2d(0.0, -std::sin(tau));
        return Vector(v);
      },
      2.0 * kPi, 4096);
}

// Fixed-step classical RK4 for a planar field, written independently of the
// library integrator. Returns the state after `steps` steps of size h.
template <typename F>
Eigen::Vector2d rk4(F&& f, double t0, Eigen::Vector2d x, double h, long steps) {
  double t = t0;
  for (long i = 0; i < steps; ++i) {
    const Eigen::Vector2d k1 = f(t, x);
    const Eigen::Vector2d k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Eigen::Vector2d k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Eigen::Vector2d k4 = f(t + h, x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = t0 + h * static_cast<double>(i + 1);
  }
  return x;
}

// Attracting-cycle oracle for the forced van der Pol oscillator
//   x'' - e (1 - x^2) x' + x + e sqrt(e) sin(t (1 + e sqrt(e) mu)) = 0
// in physical epsilon: integrate `periods` forcing periods from (2, 0) and
// return the state at a whole number of periods.
inline Eigen::Vector2d vdp_transient(double eps_phys, double mu, long periods, int steps_per_period = 400) {
  const double e15 = eps_phys * std::sqrt(eps_phys);
  const double omega = 1.0 + e15 * mu;
  const double period = 2.0 * kPi / omega;
  auto f = [&](double t, const Eigen::Vector2d& x) -> Eigen::Vector2d {
    return {x[1], -x[0] + eps_phys * (1.0 - x[0] * x[0]) * x[1] - e15 * std::sin(omega * t)};
  };
  Eigen::Vector2d x(2.0, 0.0);
  const double h = period / steps_per_period;
  // Restart the clock each period so t stays small and phase-exact.
  for (long p = 0; p < periods; ++p) {
    x = rk4(f, 0.0, x, h, steps_per_period);
  }
  return x;
}

}  // namespace fx

namespace fx {

// Van der Pol damping (0, (1 - x1^2) x2) as a plain field.
inline perdeg::FieldEval vdp_two_term_damping() { return perdeg::vdp_two_term().phi1; }

}  // namespace fx
