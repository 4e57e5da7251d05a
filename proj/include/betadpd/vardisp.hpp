#pragma once

// Beta regression with a regression structure on the precision:
//   g(mu_i) = eta1(x_i, beta),   h(phi_i) = eta2(z_i, gamma).
// Predictors are linear in their parameters by default; non-linear ones are
// supplied as callbacks returning the predictor and its Jacobian.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "betadpd/dpd.hpp"
#include "betadpd/estimator.hpp"

namespace betadpd {

class Predictor {
 public:
  /// Writes eta (n) and d eta / d params (n x k).
  using Evaluate =
      std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& eta, Eigen::MatrixXd& jac)>;

  static Predictor linear(Eigen::MatrixXd design);
  static Predictor custom(Eigen::Index n, Eigen::Index parameters, Evaluate eval);

  Eigen::Index observations() const { return n_; }
  Eigen::Index parameters() const { return k_; }
  bool is_linear() const { return linear_.has_value(); }
  const Eigen::MatrixXd& design() const { return *linear_; }

  void evaluate(const Eigen::VectorXd& params, Eigen::VectorXd& eta, Eigen::MatrixXd& jac) const;

 private:
  Eigen::Index n_ = 0;
  Eigen::Index k_ = 0;
  std::optional<Eigen::MatrixXd> linear_;
  Evaluate eval_;
};

struct VarDispSpec {
  Predictor mean;
  Predictor precision;
  Link link;
  PrecisionLink precision_link;

  /// Linear predictors on data.x() and data.z(); the dataset must carry Z.
  static VarDispSpec linear(const Dataset& data, Link link = {}, PrecisionLink plink = {});

  Eigen::Index p() const { return mean.parameters(); }
  Eigen::Index q() const { return precision.parameters(); }
};

/// (mu_i, phi_i) and their derivative rows at theta = (beta, gamma).
dpd::LocalModel vd_local_model(const Dataset& data, const VarDispSpec& spec,
                               const Eigen::VectorXd& theta);

/// H_{n,alpha}; throws DivergentIntegralError when infeasible.
double vd_objective(const Dataset& data, const VarDispSpec& spec, const Eigen::VectorXd& theta,
                    double alpha);

/// Gradient with respect to (beta, gamma).
Eigen::VectorXd vd_gradient(const Dataset& data, const VarDispSpec& spec,
                            const Eigen::VectorXd& theta, double alpha);

/// Psi and Omega in (beta, gamma) coordinates.
dpd::SandwichPair vd_sandwich(const Dataset& data, const VarDispSpec& spec,
                              const Eigen::VectorXd& theta, double alpha);

struct VdFitConfig {
  double alpha = 0.0;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  int step_halvings_max = 30;
  /// Required for non-linear predictors.
  std::optional<Eigen::VectorXd> start;
  int restarts = 5;
  double restart_alpha = 0.5;
  bool compute_covariance = true;
};

struct VdFitResult {
  Eigen::VectorXd theta;  // (beta, gamma)
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  double alpha = 0.0;
  double objective_value = 0.0;
  double gradient_norm = 0.0;
  Eigen::MatrixXd covariance;
  bool covariance_available = false;
  bool converged = false;
  int iterations = 0;
  std::vector<TraceEntry> trace;
  std::string message;

  Eigen::VectorXd beta() const { return theta.head(p); }
  Eigen::VectorXd gamma() const { return theta.tail(q); }
  Eigen::VectorXd standard_errors() const;
};

/// Start point for linear predictors: beta as in initial_estimate, gamma from a
/// least-squares fit of h(phi0) on Z.
Eigen::VectorXd vd_initial_estimate(const Dataset& data, const VarDispSpec& spec);

VdFitResult vd_fit(const Dataset& data, const VarDispSpec& spec, const VdFitConfig& config);

}  // namespace betadpd
