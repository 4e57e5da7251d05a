#include "betadpd/optimizer.hpp"

#include <cmath>
#include <limits>

namespace betadpd {
namespace {

double max_norm(const Eigen::VectorXd&, const Eigen::VectorXd& g) {
  return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

// Decrease too small to resolve in double precision.
bool within_roundoff(double f_new, double f) { return f_new <= f + 1e-13 * (1.0 + std::abs(f)); }

}  // namespace

OptimResult minimize_bfgs(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                          const OptimOptions& options,
                          const std::optional<Eigen::MatrixXd>& inverse_hessian0) {
  const auto norm = options.stationarity ? options.stationarity : max_norm;
  const Eigen::Index k = x0.size();

  OptimResult r;
  r.x = x0;
  r.g.resize(k);
  r.f = fn(r.x, &r.g);
  if (!std::isfinite(r.f) || !r.g.allFinite()) {
    r.message = "objective is not finite at the start point";
    r.gradient_norm = std::numeric_limits<double>::infinity();
    return r;
  }
  r.gradient_norm = norm(r.x, r.g);
  r.trace.push_back({r.f, 0.0});

  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(k, k);
  bool seeded = false;
  if (inverse_hessian0 && inverse_hessian0->allFinite()) {
    h = *inverse_hessian0;
    seeded = true;
  }
  bool h_is_identity = !seeded;

  Eigen::VectorXd x_new(k), g_new(k);
  while (true) {
    if (r.gradient_norm <= options.gradient_tolerance) {
      r.converged = true;
      r.message = "gradient tolerance reached";
      break;
    }
    if (r.iterations >= options.max_iterations) {
      r.message = "iteration limit reached";
      break;
    }

    Eigen::VectorXd d = -h * r.g;
    double slope = r.g.dot(d);
    if (!(slope < 0.0) || !d.allFinite()) {
      // Curvature estimate lost positive definiteness: gradient step.
      h.setIdentity();
      h_is_identity = true;
      d = -r.g;
      slope = r.g.dot(d);
    }

    double t = 1.0;
    bool accepted = false;
    double f_new = 0.0;
    for (int halving = 0; halving <= options.max_halvings; ++halving, t *= 0.5) {
      x_new = r.x + t * d;
      f_new = fn(x_new, &g_new);
      if (!std::isfinite(f_new) || !g_new.allFinite()) continue;
      if (f_new <= r.f + options.armijo * t * slope) {
        accepted = true;
        break;
      }
      // Approximate Wolfe conditions for steps whose decrease is lost in roundoff.
      const double slope_new = g_new.dot(d);
      if (within_roundoff(f_new, r.f) && slope_new >= 0.9 * slope && slope_new <= -0.8 * slope) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      if (!h_is_identity) {
        // Retry once along the steepest-descent direction.
        h.setIdentity();
        h_is_identity = true;
        continue;
      }
      r.message = "line search failed";
      break;
    }

    const Eigen::VectorXd s = x_new - r.x;
    const Eigen::VectorXd y = g_new - r.g;
    const double sy = s.dot(y);
    r.x = x_new;
    r.f = f_new;
    r.g = g_new;
    r.gradient_norm = norm(r.x, r.g);
    ++r.iterations;
    r.trace.push_back({r.f, t});

    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (h_is_identity) {
        h *= sy / y.squaredNorm();
        h_is_identity = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h * y;
      // (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded.
      h += rho * rho * y.dot(hy) * (s * s.transpose()) + rho * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
      h = 0.5 * (h + h.transpose());
    }
  }
  return r;
}

}  // namespace betadpd
