#include "betadpd/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "betadpd/error.hpp"

namespace betadpd {

std::vector<double> default_tuning_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 20; ++k) g.push_back(k / 20.0);
  return g;
}

TuningResult select_alpha(const Dataset& data, const Link& link, const TuningOptions& options) {
  TuningResult r;
  r.alpha_grid = options.grid.empty() ? default_tuning_grid() : options.grid;
  std::sort(r.alpha_grid.begin(), r.alpha_grid.end());
  if (r.alpha_grid.front() < 0.0) throw DomainError("tuning grid must be non-negative");

  FitConfig pilot_cfg = options.fit;
  pilot_cfg.alpha = options.pilot_alpha;
  const FitResult pilot = fit(data, link, pilot_cfg);
  if (!pilot.converged || !pilot.covariance_available) {
    throw ModelError("pilot fit at alpha = " + std::to_string(options.pilot_alpha) +
                     " did not converge");
  }
  r.pilot = pilot.theta_hat;
  const Eigen::VectorXd star = pilot.theta_hat.natural();
  const Eigen::VectorXd scale = pilot.standard_errors();

  const std::vector<PathPoint> path = fit_alpha_path(data, link, r.alpha_grid, options.fit);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  double best_std = best;
  bool any = false;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double a = r.alpha_grid[k];
    // The pilot itself sits on the grid: reuse it so its bias term is exactly zero.
    const FitResult* f = a == options.pilot_alpha ? &pilot : (path[k].fit ? &*path[k].fit : nullptr);
    if (!f || !f->converged || !f->covariance_available) {
      r.warnings.push_back("alpha = " + std::to_string(a) + ": " +
                           (f ? f->message : path[k].error) + "; excluded");
      r.mse_estimates.push_back(nan);
      r.bias_terms.push_back(nan);
      r.variance_terms.push_back(nan);
      r.mse_standardized.push_back(nan);
      continue;
    }
    const Eigen::VectorXd diff = f->theta_hat.natural() - star;
    const Eigen::VectorXd var = f->covariance.diagonal();
    const double bias = diff.squaredNorm();
    const double variance = var.sum();
    const double standardized =
        (diff.array() / scale.array()).square().sum() + (var.array() / scale.array().square()).sum();
    r.bias_terms.push_back(bias);
    r.variance_terms.push_back(variance);
    r.mse_estimates.push_back(bias + variance);
    r.mse_standardized.push_back(standardized);
    // Strict comparison keeps the smaller alpha on ties.
    if (bias + variance < best) {
      best = bias + variance;
      r.alpha_star_raw = a;
    }
    if (standardized < best_std) {
      best_std = standardized;
      r.alpha_star_standardized = a;
    }
    any = true;
  }
  if (!any) throw ModelError("every alpha on the tuning grid failed to fit");
  r.alpha_star = options.standardize ? r.alpha_star_standardized : r.alpha_star_raw;
  return r;
}

}  // namespace betadpd
