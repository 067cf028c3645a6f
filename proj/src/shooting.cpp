#include "perdeg/shooting.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace perdeg {

double forcing_power(const PerturbedSystem& sys, double eps) {
  return sys.profile == Profile::TwoTerm ? eps * eps * eps : eps;
}

double drift_power(const PerturbedSystem& sys, double eps) {
  return sys.profile == Profile::TwoTerm ? eps * eps : 0.0;
}

FieldEval full_field(const PerturbedSystem& sys, double eps, double mu) {
  const double c1 = drift_power(sys, eps);
  const double c2 = forcing_power(sys, eps);
  const double stretch = 1.0 + c2 * mu;
  const FieldEval psi = sys.psi;
  const FieldEval phi1 = sys.phi1;
  const Forcing phi2 = sys.phi2;
  auto f = [=](double t, const Vector& x) -> Vector {
    Vector out = psi(t, x) + c2 * phi2(t * stretch, x, eps, mu);
    if (c1 != 0.0) {
      out += c1 * phi1(t, x);
    }
    return out;
  };
  auto jac = [=](double t, const Vector& x) -> Matrix {
    Matrix out = psi.jacobian(t, x) + c2 * phi2.jacobian(t * stretch, x, eps, mu);
    if (c1 != 0.0) {
      out += c1 * phi1.jacobian(t, x);
    }
    return out;
  };
  return FieldEval(f, jac);
}

double detuned_period(const PerturbedSystem& sys, double period, double eps, double mu) {
  return period / (1.0 + forcing_power(sys, eps) * mu);
}

namespace {

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    out.push_back(es.eigenvalues()[i]);
  }
  return out;
}

double amplitude_of(const Trajectory& traj) {
  double best = 0.0;
  const auto& grid = traj.grid();
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    for (int j = 0; j < 16; ++j) {
      const double t = grid[k] + (grid[k + 1] - grid[k]) * j / 16.0;
      best = std::max(best, traj.at(t).norm());
    }
  }
  return std::max(best, traj.final_state().norm());
}

double liouville_defect(const FieldEval& field, double period, const Vector& xi, const Matrix& monodromy,
                        const Tolerances& tol) {
  const Eigen::Index n = xi.size();
  VectorField augmented = [&field, n](double t, const Vector& z) {
    const Vector x = z.head(n);
    Vector out(n + 1);
    out.head(n) = field.f(t, x);
    out[n] = field.jacobian(t, x).trace();
    return out;
  };
  Vector z0 = Vector::Zero(n + 1);
  z0.head(n) = xi;
  const double trace_integral = integrate(augmented, 0.0, period, z0, tol).final_state()[n];
  return std::abs(monodromy.determinant() - std::exp(trace_integral));
}

}  // namespace

PeriodicOrbit find_periodic_orbit(const PerturbedSystem& sys, double eps, std::optional<double> mu, double period,
                                  const Vector& guess, const ShootingOptions& options) {
  if (!(eps >= 0.0 && eps <= 0.5)) {
    throw std::invalid_argument("find_periodic_orbit: eps must lie in [0, 0.5]");
  }
  if (!guess.allFinite() || guess.size() != sys.n) {
    throw std::invalid_argument("find_periodic_orbit: guess must be a finite state of the system dimension");
  }
  if (!(period > 0.0)) {
    throw std::invalid_argument("find_periodic_orbit: period must be positive");
  }
  const FieldEval field = full_field(sys, eps, mu.value_or(0.0));
  const Matrix id = Matrix::Identity(sys.n, sys.n);
  auto residual_at = [&](const Vector& xi) {
    return (integrate(field, 0.0, period, xi, options.integration).final_state() - xi).norm();
  };

  Vector xi = guess;
  for (int iter = 0; iter <= options.max_iters; ++iter) {
    auto [traj, fund] = integrate_with_variational(field, 0.0, period, xi, options.integration);
    const Vector g = traj.final_state() - xi;
    const double r = g.norm();
    const Matrix m = fund.final_matrix();
    const auto eigs = eigenvalues(m);
    for (const auto& ev : eigs) {
      if (std::abs(ev - 1.0) < options.singular_tol) {
        throw SingularJacobian("find_periodic_orbit: monodromy has a multiplier at 1 (degenerate return map)");
      }
    }

    if (r < options.residual_tol) {
      PeriodicOrbit orbit;
      orbit.xi_star = xi;
      orbit.period = period;
      orbit.residual = r;
      orbit.newton_iters = iter;
      orbit.monodromy = m;
      orbit.monodromy_eigs = eigs;
      orbit.amplitude = amplitude_of(traj);
      orbit.liouville_defect = liouville_defect(field, period, xi, m, options.integration);
      return orbit;
    }
    if (iter == options.max_iters) {
      break;
    }
    const Vector step = (m - id).partialPivLu().solve(-g);
    if (!step.allFinite()) {
      throw SingularJacobian("find_periodic_orbit: Newton system is singular");
    }
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h <= options.max_halvings; ++h) {
      const Vector trial = xi + lambda * step;
      double rt = std::numeric_limits<double>::infinity();
      try {
        rt = residual_at(trial);
      } catch (const Error&) {
        // blow-up along the trial step counts as no improvement
      }
      if (rt < r) {
        xi = trial;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      std::ostringstream msg;
      msg << "find_periodic_orbit: damping exhausted at residual " << r;
      throw NewtonDiverged(msg.str());
    }
  }
  throw NewtonDiverged("find_periodic_orbit: no convergence within the iteration budget");
}

std::vector<Vector> transported_path(const PerturbedSystem& sys, const FieldEval& full, const PeriodicOrbit& orbit,
                                     int count) {
  const Trajectory traj = integrate(full, 0.0, orbit.period, orbit.xi_star, sys.tol);
  std::vector<Vector> z(static_cast<std::size_t>(count));
  parallel_for(z.size(), [&](std::size_t k) {
    const double t = count == 1 ? 0.0 : orbit.period * static_cast<double>(k) / (count - 1);
    z[k] = flow_point(sys, 0.0, t, traj.at(t));
  });
  return z;
}

bool path_in_certified_set(const Certificate& cert, const std::vector<Vector>& z_path) {
  for (const auto& z : z_path) {
    const Point2 p(z[0], z[1]);
    if (!cert.region.contains(p)) {
      return false;
    }
    if (cert.inner && cert.inner->closure_contains(p)) {
      return false;
    }
  }
  return true;
}

std::vector<Vector> seed_guesses(const Certificate& cert) {
  std::vector<Vector> seeds;
  const Point2 c = cert.region.centroid();
  seeds.push_back(Vector(c));
  const BoundaryCurve* inner = nullptr;
  if (cert.inner) {
    inner = &cert.inner->outer;
  } else if (!cert.region.holes.empty()) {
    inner = &cert.region.holes.front();
  }
  if (inner != nullptr) {
    for (int k = 0; k < 4; ++k) {
      const double theta = 0.25 * k;
      seeds.push_back(Vector(0.5 * ((*inner)(theta) + cert.region.outer(theta))));
    }
  }
  return seeds;
}

std::vector<VerificationRow> verify_certificate(const Certificate& cert, const PerturbedSystem& sys,
                                                const std::vector<double>& eps_list, std::optional<double> mu,
                                                const std::vector<Vector>& guesses, const VerifyOptions& options) {
  PerturbedSystem local = sys;
  local.period = cert.period;
  const double mu_value = mu.value_or(0.0);

  std::vector<VerificationRow> rows(eps_list.size());
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    rows[e].epsilon = eps_list[e];
    rows[e].mu = mu_value;
    rows[e].period = detuned_period(local, cert.period, eps_list[e], mu_value);
    rows[e].attempts.resize(guesses.size());
    for (std::size_t g = 0; g < guesses.size(); ++g) {
      jobs.emplace_back(e, g);
    }
  }

  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto [e, g] = jobs[j];
    VerificationRow& row = rows[e];
    VerificationAttempt& at = row.attempts[g];
    at.guess = guesses[g];
    try {
      const PeriodicOrbit orbit =
          find_periodic_orbit(local, eps_list[e], mu, row.period, guesses[g], options.shooting);
      at.found = true;
      at.residual = orbit.residual;
      at.amplitude = orbit.amplitude;
      at.xi_star = orbit.xi_star;
      const FieldEval field = full_field(local, eps_list[e], mu_value);
      at.in_region = path_in_certified_set(cert, transported_path(local, field, orbit, options.time_samples));
    } catch (const std::exception& ex) {
      at.error = ex.what();
    }
  });

  for (auto& row : rows) {
    const VerificationAttempt* pick = nullptr;
    for (const auto& at : row.attempts) {
      if (at.found && at.in_region) {
        pick = &at;
        break;
      }
    }
    if (pick == nullptr) {
      for (const auto& at : row.attempts) {
        if (at.found) {
          pick = &at;
          break;
        }
      }
    }
    if (pick != nullptr) {
      row.found = true;
      row.residual = pick->residual;
      row.amplitude = pick->amplitude;
      row.in_region = pick->in_region;
    }
    if (cert.predicted_degree == 0) {
      row.conclusion = "no_conclusion";
    } else if (row.found && row.in_region) {
      row.conclusion = "confirmed";
    } else if (row.found) {
      row.conclusion = "outside_region";
    } else {
      row.conclusion = "not_found";
    }
  }
  return rows;
}

}  // namespace perdeg
