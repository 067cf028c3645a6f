#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "perdeg/theorems.hpp"

namespace perdeg {

struct PeriodicOrbit {
  Vector xi_star;
  double period = 0.0;
  double residual = 0.0;  // |x(T; xi*) - xi*|
  int newton_iters = 0;
  Matrix monodromy;
  std::vector<std::complex<double>> monodromy_eigs;
  double amplitude = 0.0;          // max over one period of |x(t)|
  double liouville_defect = 0.0;   // |det M - exp(int_0^T tr(df/dx) dt)|
};

struct ShootingOptions {
  int max_iters = 50;
  double residual_tol = 1e-9;
  int max_halvings = 8;
  double singular_tol = 1e-8;  // distance of a monodromy eigenvalue from 1
  Tolerances integration{1e-12, 1e-12};
};

/// Multiplier of the forcing term: eps^3 (TwoTerm) or eps (OneTerm).
[[nodiscard]] double forcing_power(const PerturbedSystem& sys, double eps);
/// eps^2 (TwoTerm) or 0 (OneTerm).
[[nodiscard]] double drift_power(const PerturbedSystem& sys, double eps);

/// The full field psi + eps^2 phi1 + eps^3 phi2(t (1 + eps^3 mu), x, eps, mu)
/// (profile-appropriate powers), with its Jacobian.
[[nodiscard]] FieldEval full_field(const PerturbedSystem& sys, double eps, double mu = 0.0);

/// Period of the detuned forcing: T / (1 + forcing_power * mu).
[[nodiscard]] double detuned_period(const PerturbedSystem& sys, double period, double eps, double mu);

/// Damped Newton on xi -> x(period; xi) - xi. eps must lie in [0, 0.5].
/// Throws SingularJacobian when a multiplier sits within singular_tol of 1
/// and NewtonDiverged when the iteration does not reach residual_tol.
[[nodiscard]] PeriodicOrbit find_periodic_orbit(const PerturbedSystem& sys, double eps, std::optional<double> mu,
                                                double period, const Vector& guess,
                                                const ShootingOptions& options = {});

/// z(t) = Omega(0, t, x(t)) on `count` equally spaced times in [0, period].
[[nodiscard]] std::vector<Vector> transported_path(const PerturbedSystem& sys, const FieldEval& full,
                                                   const PeriodicOrbit& orbit, int count);

struct VerificationAttempt {
  Vector guess;
  bool found = false;
  double residual = 0.0;
  double amplitude = 0.0;
  bool in_region = false;
  Vector xi_star;
  std::string error;
};

struct VerificationRow {
  double epsilon = 0.0;
  double mu = 0.0;
  double period = 0.0;
  bool found = false;
  double residual = 0.0;
  double amplitude = 0.0;
  bool in_region = false;
  std::string conclusion;  // confirmed | outside_region | not_found | no_conclusion
  std::vector<VerificationAttempt> attempts;
};

struct VerifyOptions {
  ShootingOptions shooting;
  int time_samples = 128;
};

/// Centroid of the certificate region plus four points on the mid-curve
/// between the inner and outer boundaries for annular regions.
[[nodiscard]] std::vector<Vector> seed_guesses(const Certificate& cert);

/// One row per epsilon. Shooting failures are recorded, never thrown.
[[nodiscard]] std::vector<VerificationRow> verify_certificate(const Certificate& cert, const PerturbedSystem& sys,
                                                              const std::vector<double>& eps_list,
                                                              std::optional<double> mu,
                                                              const std::vector<Vector>& guesses,
                                                              const VerifyOptions& options = {});

/// Membership of a z-path in the certified set: inside the region at every
/// sample and, with an inner region, outside its closure at every sample.
[[nodiscard]] bool path_in_certified_set(const Certificate& cert, const std::vector<Vector>& z_path);

}  // namespace perdeg
