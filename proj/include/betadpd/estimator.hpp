#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "betadpd/kernels.hpp"
#include "betadpd/link.hpp"
#include "betadpd/model.hpp"
#include "betadpd/optimizer.hpp"

namespace betadpd {

struct FitConfig {
  double alpha = 0.0;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  int step_halvings_max = 30;
  std::optional<ParamVector> warm_start;
  /// Extra jittered starts used when alpha >= restart_alpha.
  int restarts = 5;
  double restart_alpha = 0.5;
  bool compute_covariance = true;
  kernels::Exec exec = kernels::Exec::automatic;
};

struct FitResult {
  ParamVector theta_hat;
  Link link;
  double alpha = 0.0;
  Eigen::Index n = 0;
  double objective_value = 0.0;
  /// max(|dH/dbeta|, |dH/dlog phi|, |dH/dphi|), all max-norms.
  double gradient_norm = 0.0;
  /// n^-1 Psi^-1 Omega Psi^-1 at theta_hat in (beta, phi) coordinates.
  Eigen::MatrixXd covariance;
  bool covariance_available = false;
  bool converged = false;
  int iterations = 0;
  std::vector<TraceEntry> trace;
  std::string message;

  /// Square roots of the covariance diagonal (NaN when unavailable).
  Eigen::VectorXd standard_errors() const;
};

/// beta from least squares of g(y) on X; phi from the moment identity
/// Var(y) = mu(1-mu)/(1+phi), floored at 0.5.
ParamVector initial_estimate(const Dataset& data, const Link& link);
ParamVector initial_estimate(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Link& link);

/// Minimizes H_{n,alpha} over (beta, log phi). Throws DivergentIntegralError
/// when alpha is infeasible at the start point.
FitResult fit(const Dataset& data, const Link& link, const FitConfig& config);

struct PathPoint {
  double alpha = 0.0;
  std::optional<FitResult> fit;
  std::string error;
};

/// Fits each alpha in ascending order, warm-starting from the previous estimate.
/// Errors are recorded per point and the path continues.
std::vector<PathPoint> fit_alpha_path(const Dataset& data, const Link& link,
                                      std::span<const double> alphas, const FitConfig& base = {});

}  // namespace betadpd
