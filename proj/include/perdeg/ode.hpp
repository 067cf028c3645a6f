#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "perdeg/common.hpp"

namespace perdeg {

using VectorField = std::function<Vector(double, const Vector&)>;
using JacobianField = std::function<Matrix(double, const Vector&)>;

/// Right-hand side f(t, x) with an optional analytic Jacobian.
/// Without one, jacobian() falls back to central differences.
struct FieldEval {
  VectorField f;
  JacobianField jac;

  FieldEval() = default;
  FieldEval(VectorField field, JacobianField jacobian = {})
      : f(std::move(field)), jac(std::move(jacobian)) {}

  [[nodiscard]] Vector operator()(double t, const Vector& x) const { return f(t, x); }
  [[nodiscard]] Matrix jacobian(double t, const Vector& x) const;
  [[nodiscard]] bool has_analytic_jacobian() const { return static_cast<bool>(jac); }
};

/// Central-difference Jacobian with step max(1e-6, 1e-6 * |x|).
[[nodiscard]] Matrix finite_difference_jacobian(const VectorField& f, double t, const Vector& x);

/// Largest relative discrepancy between the analytic and finite-difference
/// Jacobians over `probes` random points drawn from [-box, box]^n x [0, t_span].
[[nodiscard]] double jacobian_consistency(const FieldEval& field, int n, int probes, double box, double t_span,
                                          unsigned seed = 7);

struct Tolerances {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
};

/// Dense solution of an initial value problem. Immutable once built.
class Trajectory {
 public:
  Trajectory() = default;

  [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
  [[nodiscard]] const std::vector<Vector>& states() const { return states_; }
  [[nodiscard]] std::size_t steps() const { return grid_.empty() ? 0 : grid_.size() - 1; }
  [[nodiscard]] Eigen::Index dim() const { return states_.empty() ? 0 : states_.front().size(); }
  [[nodiscard]] double t_begin() const { return grid_.front(); }
  [[nodiscard]] double t_end() const { return grid_.back(); }
  [[nodiscard]] const Vector& final_state() const { return states_.back(); }
  [[nodiscard]] Tolerances tolerances() const { return tol_; }

  /// Dense output. Grid times return the stored state bit for bit.
  [[nodiscard]] Vector at(double t) const;
  /// Index k of the step [grid[k], grid[k+1]] containing t.
  [[nodiscard]] std::size_t locate(double t) const;
  /// Dense output on a known step k (t must lie in that step).
  [[nodiscard]] Vector at_step(std::size_t k, double t) const;

  /// Rows [offset, offset + count) of the state, as their own trajectory.
  [[nodiscard]] Trajectory slice(Eigen::Index offset, Eigen::Index count) const;

 private:
  friend class TrajectoryBuilder;

  std::vector<double> grid_;
  std::vector<Vector> states_;
  // Per step: 5 coefficient columns of the quartic continuous extension.
  std::vector<Matrix> dense_;
  Tolerances tol_;
};

/// Fundamental matrix Y(t) of the variational equation along a trajectory.
class FundamentalPath {
 public:
  FundamentalPath() = default;
  FundamentalPath(Trajectory flat, Eigen::Index n);

  [[nodiscard]] const std::vector<double>& grid() const { return flat_.grid(); }
  [[nodiscard]] Eigen::Index dim() const { return n_; }
  [[nodiscard]] Matrix matrix(std::size_t grid_index) const;
  [[nodiscard]] Matrix at(double t) const;
  [[nodiscard]] Matrix final_matrix() const { return matrix(grid().size() - 1); }

 private:
  Trajectory flat_;
  Eigen::Index n_ = 0;
};

/// Adaptive Dormand-Prince 5(4) with PI step control. Integrates forward or
/// backward; t1 == t0 yields a single-point trajectory.
[[nodiscard]] Trajectory integrate(const VectorField& f, double t0, double t1, const Vector& x0,
                                   Tolerances tol = {});
[[nodiscard]] Trajectory integrate(const FieldEval& field, double t0, double t1, const Vector& x0,
                                   Tolerances tol = {});

/// Integrates x' = f(t,x) together with Y' = (df/dx)(t,x) Y, Y(t0) = I, under
/// shared step control.
[[nodiscard]] std::pair<Trajectory, FundamentalPath> integrate_with_variational(const FieldEval& field, double t0,
                                                                                double t1, const Vector& x0,
                                                                                Tolerances tol = {});

/// Column-major flattening used for augmented matrix states.
[[nodiscard]] inline Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}
[[nodiscard]] inline Matrix unflatten(const Eigen::Ref<const Vector>& v, Eigen::Index n) {
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

}  // namespace perdeg
