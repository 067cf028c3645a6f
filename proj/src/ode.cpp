#include "perdeg/ode.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace perdeg {

namespace {

// Dormand-Prince 5(4) tableau with Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kFacMin = 0.2;   // largest shrink is 1/5 ...
constexpr double kFacMax = 10.0;  // ... largest growth is 10x
constexpr std::size_t kMaxSteps = 2'000'000;

Vector eval_checked(const VectorField& f, double t, const Vector& x) {
  Vector v = f(t, x);
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite field value at t=" << t;
    throw NonFiniteState(msg.str());
  }
  return v;
}

double error_norm(const Vector& err, const Vector& y0, const Vector& y1, const Tolerances& tol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sk = tol.abs_tol + tol.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sk;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

double initial_step(const VectorField& f, double t0, const Vector& x0, const Vector& f0, double dir, double hmax,
                    const Tolerances& tol) {
  const auto n = static_cast<double>(x0.size());
  double dnf = 0.0, dny = 0.0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const double sk = tol.abs_tol + tol.rel_tol * std::abs(x0[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (x0[i] / sk) * (x0[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  const Vector x1 = x0 + dir * h * f0;
  const Vector f1 = eval_checked(f, t0 + dir * h, x1);
  double der2 = 0.0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const double sk = tol.abs_tol + tol.rel_tol * std::abs(x0[i]);
    const double d = (f1[i] - f0[i]) / sk;
    der2 += d * d;
  }
  der2 = std::sqrt(der2 / n) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf / n));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 5.0);
  return std::min({100.0 * h, h1, hmax});
}

void check_tolerances(const Tolerances& tol) {
  auto ok = [](double v) { return v >= 1e-14 && v <= 1e-2; };
  if (!ok(tol.abs_tol) || !ok(tol.rel_tol)) {
    throw std::invalid_argument("integrator tolerances must lie in [1e-14, 1e-2]");
  }
}

}  // namespace

class TrajectoryBuilder {
 public:
  static Trajectory run(const VectorField& f, double t0, double t1, const Vector& x0, const Tolerances& tol) {
    check_tolerances(tol);
    if (!std::isfinite(t0) || !std::isfinite(t1)) {
      throw std::invalid_argument("integration bounds must be finite");
    }
    if (!x0.allFinite()) {
      throw NonFiniteState("non-finite initial state");
    }
    Trajectory traj;
    traj.tol_ = tol;
    traj.grid_.push_back(t0);
    traj.states_.push_back(x0);
    if (t1 == t0) {
      return traj;
    }

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double t = t0;
    Vector y = x0;
    Vector k1 = eval_checked(f, t, y);
    double h = initial_step(f, t0, x0, k1, dir, span, tol);
    double fac_old = 1e-4;
    bool last_rejected = false;

    for (std::size_t step = 0;; ++step) {
      if (step > kMaxSteps) {
        throw StepSizeUnderflow("step budget exhausted before reaching t1");
      }
      const double remaining = std::abs(t1 - t);
      const bool final_step = h >= remaining * (1.0 - 1e-13);
      if (final_step) {
        h = remaining;
      }
      const double hs = dir * h;
      const double floor_h = 1e-14 * std::max(1.0, std::abs(t));
      if (h < floor_h && !final_step) {
        std::ostringstream msg;
        msg << "step size underflow at t=" << t;
        throw StepSizeUnderflow(msg.str());
      }

      const Vector k2 = eval_checked(f, t + c2 * hs, y + hs * (a21 * k1));
      const Vector k3 = eval_checked(f, t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
      const Vector k4 = eval_checked(f, t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vector k5 = eval_checked(f, t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vector k6 =
          eval_checked(f, t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const double t_new = final_step ? t1 : t + hs;
      const Vector y_new = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      if (!y_new.allFinite()) {
        throw NonFiniteState("non-finite state during integration");
      }
      const Vector k7 = eval_checked(f, t_new, y_new);
      const Vector err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = error_norm(err, y, y_new, tol);

      const double fac11 = std::pow(std::max(en, 1e-300), 0.2 - kBeta * 0.75);
      if (en <= 1.0) {
        Matrix dense(y.size(), 5);
        const Vector ydiff = y_new - y;
        const Vector bspl = hs * k1 - ydiff;
        dense.col(0) = y;
        dense.col(1) = ydiff;
        dense.col(2) = bspl;
        dense.col(3) = ydiff - hs * k7 - bspl;
        dense.col(4) = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        traj.dense_.push_back(std::move(dense));
        traj.grid_.push_back(t_new);
        traj.states_.push_back(y_new);

        if (final_step) {
          break;
        }
        double fac = fac11 / std::pow(fac_old, kBeta);
        fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
        double h_new = h / fac;
        if (last_rejected) {
          h_new = std::min(h_new, h);
        }
        fac_old = std::max(en, 1e-4);
        t = t_new;
        y = y_new;
        k1 = k7;
        h = std::min(h_new, span);
        last_rejected = false;
      } else {
        h = h / std::min(1.0 / kFacMin, fac11 / kSafety);
        last_rejected = true;
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
          std::ostringstream msg;
          msg << "step size underflow at t=" << t;
          throw StepSizeUnderflow(msg.str());
        }
      }
    }
    return traj;
  }

  static Trajectory slice(const Trajectory& src, Eigen::Index offset, Eigen::Index count) {
    Trajectory out;
    out.tol_ = src.tol_;
    out.grid_ = src.grid_;
    out.states_.reserve(src.states_.size());
    for (const auto& s : src.states_) {
      out.states_.push_back(s.segment(offset, count));
    }
    out.dense_.reserve(src.dense_.size());
    for (const auto& d : src.dense_) {
      out.dense_.push_back(d.middleRows(offset, count));
    }
    return out;
  }
};

Matrix finite_difference_jacobian(const VectorField& f, double t, const Vector& x) {
  const double h = std::max(1e-6, 1e-6 * x.norm());
  const Eigen::Index n = x.size();
  Matrix jac(n, n);
  Vector xp = x;
  Vector xm = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (f(t, xp) - f(t, xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

Matrix FieldEval::jacobian(double t, const Vector& x) const {
  if (jac) {
    return jac(t, x);
  }
  return finite_difference_jacobian(f, t, x);
}

double jacobian_consistency(const FieldEval& field, int n, int probes, double box, double t_span, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-box, box);
  std::uniform_real_distribution<double> ut(0.0, t_span);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = ux(rng);
    }
    const double t = ut(rng);
    const Matrix a = field.jacobian(t, x);
    const Matrix fd = finite_difference_jacobian(field.f, t, x);
    worst = std::max(worst, (a - fd).norm() / std::max(1.0, fd.norm()));
  }
  return worst;
}

std::size_t Trajectory::locate(double t) const {
  // Index k of the step [grid_[k], grid_[k+1]] containing t.
  const bool forward = grid_.back() >= grid_.front();
  const double lo = forward ? grid_.front() : grid_.back();
  const double hi = forward ? grid_.back() : grid_.front();
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  if (t < lo - slack || t > hi + slack) {
    std::ostringstream msg;
    msg << "dense output requested at t=" << t << " outside [" << lo << ", " << hi << "]";
    throw std::out_of_range(msg.str());
  }
  std::size_t k;
  if (forward) {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    k = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  } else {
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t, std::greater<>());
    k = it == grid_.begin() ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  }
  return std::min(k, dense_.size() - 1);
}

Vector Trajectory::at(double t) const {
  if (grid_.size() == 1) {
    if (t != grid_.front()) {
      throw std::out_of_range("dense output requested off a single-point trajectory");
    }
    return states_.front();
  }
  return at_step(locate(t), t);
}

Vector Trajectory::at_step(std::size_t k, double t) const {
  if (t == grid_[k]) {
    return states_[k];
  }
  if (t == grid_[k + 1]) {
    return states_[k + 1];
  }
  const double theta = (t - grid_[k]) / (grid_[k + 1] - grid_[k]);
  const double theta1 = 1.0 - theta;
  const Matrix& d = dense_[k];
  return d.col(0) + theta * (d.col(1) + theta1 * (d.col(2) + theta * (d.col(3) + theta1 * d.col(4))));
}

Trajectory Trajectory::slice(Eigen::Index offset, Eigen::Index count) const {
  return TrajectoryBuilder::slice(*this, offset, count);
}

FundamentalPath::FundamentalPath(Trajectory flat, Eigen::Index n) : flat_(std::move(flat)), n_(n) {}

Matrix FundamentalPath::matrix(std::size_t grid_index) const { return unflatten(flat_.states()[grid_index], n_); }

Matrix FundamentalPath::at(double t) const { return unflatten(flat_.at(t), n_); }

Trajectory integrate(const VectorField& f, double t0, double t1, const Vector& x0, Tolerances tol) {
  return TrajectoryBuilder::run(f, t0, t1, x0, tol);
}

Trajectory integrate(const FieldEval& field, double t0, double t1, const Vector& x0, Tolerances tol) {
  return TrajectoryBuilder::run(field.f, t0, t1, x0, tol);
}

std::pair<Trajectory, FundamentalPath> integrate_with_variational(const FieldEval& field, double t0, double t1,
                                                                  const Vector& x0, Tolerances tol) {
  const Eigen::Index n = x0.size();
  VectorField augmented = [&field, n](double t, const Vector& z) {
    const Vector x = z.head(n);
    const Matrix y = unflatten(z.segment(n, n * n), n);
    Vector out(n + n * n);
    out.head(n) = field.f(t, x);
    out.segment(n, n * n) = flatten(field.jacobian(t, x) * y);
    return out;
  };
  Vector z0(n + n * n);
  z0.head(n) = x0;
  z0.segment(n, n * n) = flatten(Matrix::Identity(n, n));
  const Trajectory aug = integrate(augmented, t0, t1, z0, tol);
  return {aug.slice(0, n), FundamentalPath(aug.slice(n, n * n), n)};
}

}  // namespace perdeg
