#include "perdeg/flow.hpp"

#include <cmath>
#include <mutex>
#include <random>

namespace perdeg {

Matrix Forcing::jacobian(double t, const Vector& x, double eps, double mu) const {
  if (jac) {
    return jac(t, x, eps, mu);
  }
  auto fn = f;
  return finite_difference_jacobian([&](double tt, const Vector& xx) { return fn(tt, xx, eps, mu); }, t, x);
}

FieldEval Forcing::frozen(double eps, double mu) const {
  auto fn = f;
  auto jn = jac;
  JacobianField j;
  if (jn) {
    j = [jn, eps, mu](double t, const Vector& x) { return jn(t, x, eps, mu); };
  }
  return FieldEval([fn, eps, mu](double t, const Vector& x) { return fn(t, x, eps, mu); }, j);
}

PerturbedSystem PerturbedSystem::with_fresh_cache() const {
  PerturbedSystem copy = *this;
  copy.cache = std::make_shared<FlowCache>();
  return copy;
}

PerturbedSystem make_two_term(int n, double period, FieldEval psi, FieldEval phi1, Forcing phi2, Tolerances tol) {
  if (n <= 0 || !(period > 0.0)) {
    throw std::invalid_argument("system needs positive dimension and period");
  }
  PerturbedSystem sys;
  sys.n = n;
  sys.period = period;
  sys.profile = Profile::TwoTerm;
  sys.psi = std::move(psi);
  sys.phi1 = std::move(phi1);
  sys.phi2 = std::move(phi2);
  sys.tol = tol;
  return sys;
}

PerturbedSystem make_one_term(int n, double period, FieldEval psi, Forcing phi, Tolerances tol) {
  FieldEval zero([n](double, const Vector&) { return Vector::Zero(n).eval(); },
                 [n](double, const Vector&) { return Matrix::Zero(n, n).eval(); });
  PerturbedSystem sys = make_two_term(n, period, std::move(psi), std::move(zero), std::move(phi), tol);
  sys.profile = Profile::OneTerm;
  return sys;
}

double periodicity_defect(const PerturbedSystem& sys, int probes, double box, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-box, box);
  std::uniform_real_distribution<double> ut(0.0, sys.period);
  std::uniform_real_distribution<double> ue(0.0, 1.0);
  double worst = 0.0;
  auto defect = [](const Vector& a, const Vector& b) { return (b - a).norm() / (1.0 + a.norm()); };
  for (int p = 0; p < probes; ++p) {
    Vector x(sys.n);
    for (int i = 0; i < sys.n; ++i) {
      x[i] = ux(rng);
    }
    const double t = ut(rng);
    const double eps = ue(rng);
    worst = std::max(worst, defect(sys.psi(t, x), sys.psi(t + sys.period, x)));
    worst = std::max(worst, defect(sys.phi1(t, x), sys.phi1(t + sys.period, x)));
    worst = std::max(worst, defect(sys.phi2(t, x, eps), sys.phi2(t + sys.period, x, eps)));
  }
  return worst;
}

Vector flow_point(const PerturbedSystem& sys, double t, double t0, const Vector& xi) {
  if (std::abs(t - t0) > 10.0 * sys.period) {
    throw std::invalid_argument("flow_point: |t - t0| exceeds 10 periods");
  }
  if (t == t0) {
    return xi;
  }
  return integrate(sys.psi, t0, t, xi, sys.tol).final_state();
}

double FundamentalPair::identity_defect() const {
  return (yinv * y - Matrix::Identity(y.rows(), y.cols())).norm();
}

FundamentalPair fundamental_pair(const PerturbedSystem& sys, double t, const Vector& xi) {
  if (std::abs(t) > 10.0 * sys.period) {
    throw std::invalid_argument("fundamental_pair: |t| exceeds 10 periods");
  }
  if (t == 0.0) {
    const Matrix id = Matrix::Identity(sys.n, sys.n);
    return {id, id};
  }
  auto [fwd, fwd_y] = integrate_with_variational(sys.psi, 0.0, t, xi, sys.tol);
  auto [bwd, bwd_y] = integrate_with_variational(sys.psi, t, 0.0, fwd.final_state(), sys.tol);
  FundamentalPair pair{fwd_y.final_matrix(), bwd_y.final_matrix()};
  if (!pair.y.allFinite() || !pair.yinv.allFinite()) {
    throw NonFiniteState("fundamental_pair: non-finite matrix");
  }
  if (pair.identity_defect() > 1e-6) {
    throw IdentityDefect("fundamental_pair: |Yinv Y - I| = " + std::to_string(pair.identity_defect()));
  }
  return pair;
}

LinearizationPath::LinearizationPath(const PerturbedSystem& sys, const Vector& xi)
    : n_(sys.n), period_(sys.period), xi_(xi) {
  const Eigen::Index n = n_;
  const FieldEval& psi = sys.psi;
  VectorField augmented = [&psi, n](double t, const Vector& z) {
    const Vector x = z.head(n);
    const Matrix jac = psi.jacobian(t, x);
    const Matrix y = unflatten(z.segment(n, n * n), n);
    const Matrix zinv = unflatten(z.segment(n + n * n, n * n), n);
    Vector out(n + 2 * n * n);
    out.head(n) = psi.f(t, x);
    out.segment(n, n * n) = flatten(jac * y);
    out.segment(n + n * n, n * n) = flatten(-(zinv * jac));
    return out;
  };
  Vector z0(n + 2 * n * n);
  z0.head(n) = xi;
  z0.segment(n, n * n) = flatten(Matrix::Identity(n, n));
  z0.segment(n + n * n, n * n) = flatten(Matrix::Identity(n, n));
  aug_ = integrate(augmented, 0.0, period_, z0, sys.tol);
}

Vector LinearizationPath::state(double t) const { return aug_.at(t).head(n_); }

Matrix LinearizationPath::fundamental(double t) const { return unflatten(aug_.at(t).segment(n_, n_ * n_), n_); }

Matrix LinearizationPath::inverse_fundamental(double t) const {
  return unflatten(aug_.at(t).segment(n_ + n_ * n_, n_ * n_), n_);
}

std::shared_ptr<const LinearizationPath> FlowCache::get_or_build(const PerturbedSystem& sys, const Vector& xi) {
  Key key;
  key.reserve(static_cast<std::size_t>(xi.size()) + 1);
  key.push_back(sys.period);
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    key.push_back(xi[i]);
  }
  {
    std::shared_lock lock(mutex_);
    if (auto it = paths_.find(key); it != paths_.end()) {
      return it->second;
    }
  }
  auto built = std::make_shared<const LinearizationPath>(sys, xi);
  std::unique_lock lock(mutex_);
  // Insert-once: a concurrent builder for the same key loses and adopts the stored path.
  auto [it, inserted] = paths_.emplace(std::move(key), std::move(built));
  return it->second;
}

std::size_t FlowCache::size() const {
  std::shared_lock lock(mutex_);
  return paths_.size();
}

void FlowCache::clear() {
  std::unique_lock lock(mutex_);
  paths_.clear();
}

std::shared_ptr<const LinearizationPath> linearization_path(const PerturbedSystem& sys, const Vector& xi) {
  if (!sys.cache) {
    return std::make_shared<const LinearizationPath>(sys, xi);
  }
  return sys.cache->get_or_build(sys, xi);
}

}  // namespace perdeg
