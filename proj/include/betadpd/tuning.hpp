#pragma once

// Data-driven choice of alpha by minimizing an estimated MSE around a pilot
// fit. Experimental: the criterion is a heuristic and its behaviour in small
// samples is not well understood.

#include <span>
#include <string>
#include <vector>

#include "betadpd/estimator.hpp"

namespace betadpd {

struct TuningOptions {
  std::vector<double> grid;  // empty: 0, 0.05, ..., 1
  double pilot_alpha = 0.5;
  /// Choose alpha_star from the standardized criterion instead of the raw one.
  bool standardize = false;
  FitConfig fit;
};

struct TuningResult {
  std::vector<double> alpha_grid;
  /// (theta_hat - theta*)^T (theta_hat - theta*) + trace(cov(theta_hat)); NaN where the fit failed.
  std::vector<double> mse_estimates;
  std::vector<double> bias_terms;
  std::vector<double> variance_terms;
  /// Same criterion with each coordinate divided by its pilot standard error.
  std::vector<double> mse_standardized;
  /// The selected alpha: alpha_star_raw, or alpha_star_standardized when requested.
  double alpha_star = 0.0;
  double alpha_star_raw = 0.0;
  double alpha_star_standardized = 0.0;
  ParamVector pilot;
  std::vector<std::string> warnings;
};

std::vector<double> default_tuning_grid();

/// Throws ModelError when every grid point fails or the pilot fit fails.
TuningResult select_alpha(const Dataset& data, const Link& link, const TuningOptions& options = {});

}  // namespace betadpd
