#include "perdeg/linearized.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace perdeg {

namespace {

constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss 7-point weights at kXgk[1], kXgk[3], kXgk[5], kXgk[7].
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
  Vector value;
  double error;
};

Estimate gauss_kronrod(const std::function<Vector(double)>& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Vector fc = g(center);
  Vector kronrod = kWgk[7] * fc;
  Vector gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[static_cast<std::size_t>(j)];
    const Vector f1 = g(center - dx);
    const Vector f2 = g(center + dx);
    kronrod += kWgk[static_cast<std::size_t>(j)] * (f1 + f2);
    if (j % 2 == 1) {
      gauss += kWg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
    }
  }
  kronrod *= half;
  gauss *= half;
  return {kronrod, (kronrod - gauss).norm()};
}

Vector adapt(const std::function<Vector(double)>& g, double a, double b, double abs_tol, double rel_tol,
             int depth, int max_depth) {
  Estimate est = gauss_kronrod(g, a, b);
  if (!est.value.allFinite()) {
    throw QuadratureFailure("non-finite integrand");
  }
  if (est.error <= std::max(abs_tol, rel_tol * est.value.norm())) {
    return est.value;
  }
  if (depth >= max_depth) {
    throw QuadratureFailure("adaptive quadrature exceeded subdivision depth");
  }
  const double mid = 0.5 * (a + b);
  return adapt(g, a, mid, 0.5 * abs_tol, rel_tol, depth + 1, max_depth) +
         adapt(g, mid, b, 0.5 * abs_tol, rel_tol, depth + 1, max_depth);
}

void check_query(const PerturbedSystem& sys, int which, double s, double t) {
  if (which != 1 && which != 2) {
    throw std::invalid_argument("eta: which must be 1 or 2");
  }
  const double slack = 1e-12 * sys.period;
  auto in_period = [&](double v) { return v >= -slack && v <= sys.period + slack; };
  if (!in_period(s) || !in_period(t)) {
    throw std::invalid_argument("eta: s and t must lie in [0, T]");
  }
}

/// int_a^b Yinv(tau) phi(tau, Omega(tau,0,xi)) dtau, split at the path's step
/// boundaries so each Gauss-Kronrod panel sees a smooth integrand.
Vector transported_integral(const PerturbedSystem& sys, const LinearizationPath& path, int which, double a,
                            double b) {
  if (a == b) {
    return Vector::Zero(sys.n);
  }
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const auto& grid = path.grid();
  const Trajectory& aug = path.augmented();
  const Eigen::Index n = sys.n;
  std::vector<double> cuts{lo};
  for (double g : grid) {
    if (g > lo && g < hi) {
      cuts.push_back(g);
    }
  }
  cuts.push_back(hi);
  const double total = hi - lo;
  Vector sum = Vector::Zero(n);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const std::size_t step = aug.locate(0.5 * (cuts[k] + cuts[k + 1]));
    auto integrand = [&](double tau) -> Vector {
      const Vector z = aug.at_step(step, tau);
      const Eigen::Map<const Matrix> zinv(z.data() + n + n * n, n, n);
      return zinv * detail::forcing(sys, which, tau, z.head(n));
    };
    const double share = (cuts[k + 1] - cuts[k]) / total;
    sum += adaptive_quadrature(integrand, cuts[k], cuts[k + 1], 1e-10 * share, 1e-10);
  }
  return b >= a ? sum : Vector(-sum);
}

}  // namespace

Vector adaptive_quadrature(const std::function<Vector(double)>& g, double a, double b, double abs_tol,
                           double rel_tol, int max_depth) {
  if (a == b) {
    return Vector::Zero(g(a).size());
  }
  return adapt(g, a, b, abs_tol, rel_tol, 0, max_depth);
}

Vector detail::forcing(const PerturbedSystem& sys, int which, double t, const Vector& x) {
  return which == 1 ? sys.phi1(t, x) : sys.phi2(t, x, 0.0, 0.0);
}

Vector eta_direct(const PerturbedSystem& sys, const EtaQuery& q) {
  check_query(sys, q.which, q.s, q.t);
  if (q.t == q.s) {
    return Vector::Zero(sys.n);
  }
  const Eigen::Index n = sys.n;
  const Vector x_s = flow_point(sys, q.s, 0.0, q.xi);
  const int which = q.which;
  VectorField augmented = [&sys, n, which](double t, const Vector& z) {
    const Vector x = z.head(n);
    Vector out(2 * n);
    out.head(n) = sys.psi.f(t, x);
    out.tail(n) = sys.psi.jacobian(t, x) * z.tail(n) + detail::forcing(sys, which, t, x);
    return out;
  };
  Vector z0(2 * n);
  z0.head(n) = x_s;
  z0.tail(n).setZero();
  return integrate(augmented, q.s, q.t, z0, sys.tol).final_state().tail(n);
}

Vector eta_lemma1(const PerturbedSystem& sys, const EtaQuery& q) {
  check_query(sys, q.which, q.s, q.t);
  if (q.t == q.s) {
    return Vector::Zero(sys.n);
  }
  const auto path = linearization_path(sys, q.xi);
  const double t = std::clamp(q.t, 0.0, sys.period);
  const double s = std::clamp(q.s, 0.0, sys.period);
  return path->fundamental(t) * transported_integral(sys, *path, q.which, s, t);
}

std::vector<Vector> eta_period_gaps(const PerturbedSystem& sys, int which, const std::vector<double>& s_grid,
                                    const Vector& xi) {
  for (double s : s_grid) {
    check_query(sys, which, s, sys.period);
  }
  const auto path = linearization_path(sys, xi);
  const double period = sys.period;

  std::vector<double> anchors;
  anchors.reserve(s_grid.size() + 2);
  anchors.push_back(0.0);
  for (double s : s_grid) {
    anchors.push_back(std::clamp(s, 0.0, period));
  }
  anchors.push_back(period);
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());

  // cumulative[k] = int_0^{anchors[k]} Phi
  std::vector<Vector> cumulative(anchors.size(), Vector::Zero(sys.n));
  for (std::size_t k = 1; k < anchors.size(); ++k) {
    cumulative[k] = cumulative[k - 1] + transported_integral(sys, *path, which, anchors[k - 1], anchors[k]);
  }
  const Vector& total = cumulative.back();
  const Matrix defect = Matrix::Identity(sys.n, sys.n) - path->monodromy();

  std::vector<Vector> gaps;
  gaps.reserve(s_grid.size());
  for (double s : s_grid) {
    const double sc = std::clamp(s, 0.0, period);
    const auto k = static_cast<std::size_t>(std::lower_bound(anchors.begin(), anchors.end(), sc) - anchors.begin());
    const Vector tail = total - cumulative[k];
    gaps.push_back(total - defect * tail);
  }
  return gaps;
}

Vector eta_period_gap(const PerturbedSystem& sys, int which, double s, const Vector& xi) {
  return eta_period_gaps(sys, which, {s}, xi).front();
}

}  // namespace perdeg
