#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include "perdeg/ode.hpp"

namespace perdeg {

/// Which powers of epsilon multiply the perturbation terms.
///  TwoTerm: x' = psi + eps^2 phi1 + eps^3 phi2(t, x, eps)
///  OneTerm: x' = psi + eps phi(t, x, eps), with phi stored in the phi2 slot.
enum class Profile { TwoTerm, OneTerm };

using ForcingFn = std::function<Vector(double t, const Vector& x, double eps, double mu)>;
using ForcingJacobianFn = std::function<Matrix(double t, const Vector& x, double eps, double mu)>;

/// Higher-order forcing phi2(t, x, eps, mu); mu is the detuning parameter and
/// is 0 unless a frequency-pulling scan is running.
struct Forcing {
  ForcingFn f;
  ForcingJacobianFn jac;

  [[nodiscard]] Vector operator()(double t, const Vector& x, double eps, double mu = 0.0) const {
    return f(t, x, eps, mu);
  }
  [[nodiscard]] Matrix jacobian(double t, const Vector& x, double eps, double mu = 0.0) const;
  /// phi2(., ., eps, mu) as a plain field.
  [[nodiscard]] FieldEval frozen(double eps, double mu = 0.0) const;
};

class FlowCache;

struct PerturbedSystem {
  int n = 0;
  double period = 0.0;
  Profile profile = Profile::TwoTerm;
  FieldEval psi;
  FieldEval phi1;
  Forcing phi2;
  Tolerances tol;
  std::shared_ptr<FlowCache> cache = std::make_shared<FlowCache>();

  /// Same fields, fresh cache. Use after editing any field of a copy.
  [[nodiscard]] PerturbedSystem with_fresh_cache() const;
};

[[nodiscard]] PerturbedSystem make_two_term(int n, double period, FieldEval psi, FieldEval phi1, Forcing phi2,
                                            Tolerances tol = {});
[[nodiscard]] PerturbedSystem make_one_term(int n, double period, FieldEval psi, Forcing phi, Tolerances tol = {});

/// Max relative periodicity defect |g(t+T,x) - g(t,x)| / (1 + |g(t,x)|) over
/// random probes, for g in {psi, phi1, phi2(., ., eps, 0)}.
[[nodiscard]] double periodicity_defect(const PerturbedSystem& sys, int probes = 64, double box = 3.0,
                                        unsigned seed = 11);

/// Omega(t, t0, xi): the unperturbed flow. Requires |t - t0| <= 10 T.
[[nodiscard]] Vector flow_point(const PerturbedSystem& sys, double t, double t0, const Vector& xi);

struct FundamentalPair {
  Matrix y;     // dOmega/dz(t, 0, xi)
  Matrix yinv;  // dOmega/dz(0, t, Omega(t, 0, xi))
  [[nodiscard]] double identity_defect() const;
};

/// Forward variational integration from xi and a backward one from
/// Omega(t, 0, xi). Throws IdentityDefect if |Yinv Y - I| > 1e-6.
[[nodiscard]] FundamentalPair fundamental_pair(const PerturbedSystem& sys, double t, const Vector& xi);

/// Omega(., 0, xi) on [0, T] together with Y(t) = dOmega/dz(t, 0, xi) and its
/// inverse, the latter from the adjoint equation Z' = -Z (dpsi/dx), Z(0) = I.
/// Everything is dense in t.
class LinearizationPath {
 public:
  LinearizationPath(const PerturbedSystem& sys, const Vector& xi);

  [[nodiscard]] const Vector& xi() const { return xi_; }
  [[nodiscard]] double period() const { return period_; }
  [[nodiscard]] const std::vector<double>& grid() const { return aug_.grid(); }
  [[nodiscard]] Vector state(double t) const;
  [[nodiscard]] Matrix fundamental(double t) const;
  [[nodiscard]] Matrix inverse_fundamental(double t) const;
  /// Raw dense output [x, Y, Z] (column-major blocks) for hot loops.
  [[nodiscard]] const Trajectory& augmented() const { return aug_; }
  [[nodiscard]] Vector final_state() const { return aug_.final_state().head(n_); }
  [[nodiscard]] Matrix monodromy() const { return unflatten(aug_.final_state().segment(n_, n_ * n_), n_); }

 private:
  Eigen::Index n_;
  double period_;
  Vector xi_;
  Trajectory aug_;
};

/// Insert-once cache of linearization paths keyed by the exact bits of
/// (period, xi). Lookups and inserts are internally synchronized.
class FlowCache {
 public:
  [[nodiscard]] std::shared_ptr<const LinearizationPath> get_or_build(const PerturbedSystem& sys, const Vector& xi);
  [[nodiscard]] std::size_t size() const;
  void clear();

 private:
  using Key = std::vector<double>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const LinearizationPath>> paths_;
};

[[nodiscard]] std::shared_ptr<const LinearizationPath> linearization_path(const PerturbedSystem& sys,
                                                                          const Vector& xi);

}  // namespace perdeg
