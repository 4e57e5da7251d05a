#pragma once

// BFGS on the inverse Hessian with a halving line search. The objective
// returns +inf (or any non-finite value) for points outside its domain; such
// trial steps are rejected and the step is halved.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace betadpd {

struct TraceEntry {
  double objective;
  double step;
};

struct OptimOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  int max_halvings = 30;
  double armijo = 1e-4;
  /// Norm compared against gradient_tolerance; defaults to the max-norm of g.
  std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& g)> stationarity;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd g;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<TraceEntry> trace;
  std::string message;
};

/// Returns the value at x and writes the gradient into *g when g is non-null.
using ObjectiveFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* g)>;

/// Minimizes `fn` from `x0`. `inverse_hessian0`, when given, seeds the
/// curvature; otherwise the first step uses a scaled identity. The caller must
/// supply a start point with finite value.
OptimResult minimize_bfgs(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                          const OptimOptions& options,
                          const std::optional<Eigen::MatrixXd>& inverse_hessian0 = std::nullopt);

}  // namespace betadpd
