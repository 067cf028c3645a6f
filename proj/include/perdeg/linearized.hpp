#pragma once

#include <vector>

#include "perdeg/flow.hpp"

namespace perdeg {

/// Linearized response eta_which(t, s, xi): solution of
///   y' = (dpsi/dx)(t, Omega(t,0,xi)) y + phi_which(t, Omega(t,0,xi)),  y(s) = 0,
/// with phi2 taken at eps = 0. For the OneTerm profile the single response
/// lives in slot 2.
struct EtaQuery {
  int which = 1;
  double s = 0.0;
  double t = 0.0;
  Vector xi;
};

/// Direct route: integrate the inhomogeneous linear system from s to t.
[[nodiscard]] Vector eta_direct(const PerturbedSystem& sys, const EtaQuery& q);

/// Variation-of-constants route: Y(t) * int_s^t Yinv(tau) phi(tau, Omega(tau,0,xi)) dtau.
[[nodiscard]] Vector eta_lemma1(const PerturbedSystem& sys, const EtaQuery& q);

/// eta(T, s, xi) - eta(0, s, xi) = int_0^T Phi - (I - Y(T)) int_s^T Phi.
[[nodiscard]] Vector eta_period_gap(const PerturbedSystem& sys, int which, double s, const Vector& xi);

/// The gap for every anchor in s_grid, sharing one quadrature sweep.
[[nodiscard]] std::vector<Vector> eta_period_gaps(const PerturbedSystem& sys, int which,
                                                  const std::vector<double>& s_grid, const Vector& xi);

/// int_a^b g(tau) dtau for vector-valued g by adaptive Gauss-Kronrod 7-15.
/// Throws QuadratureFailure when the error estimate cannot meet abs_tol +
/// rel_tol * |I| within the subdivision budget.
[[nodiscard]] Vector adaptive_quadrature(const std::function<Vector(double)>& g, double a, double b,
                                         double abs_tol = 1e-10, double rel_tol = 1e-10, int max_depth = 40);

namespace detail {
/// The forcing phi_which(t, x) at eps = 0, mu = 0.
[[nodiscard]] Vector forcing(const PerturbedSystem& sys, int which, double t, const Vector& x);
}  // namespace detail

}  // namespace perdeg
