#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "betadpd/dpd.hpp"
#include "betadpd/estimator.hpp"

namespace betadpd {

/// H0: M beta = m0 with M of full row rank r <= p.
struct LinearHypothesis {
  Eigen::MatrixXd m;
  Eigen::VectorXd m0;

  /// H0: beta_j = value.
  static LinearHypothesis coefficient(Eigen::Index p, Eigen::Index j, double value = 0.0);
  Eigen::Index rows() const { return m.rows(); }
  /// Throws ModelError on shape problems or rank deficiency.
  void validate(Eigen::Index p) const;
};

/// Which p x p matrix stands in for the asymptotic covariance of sqrt(n) beta_hat.
enum class BetaBlock {
  /// Psi11^-1 Omega11 Psi11^-1 from the leading blocks.
  leading,
  /// Leading block of Psi^-1 Omega Psi^-1.
  full_inverse,
};

/// p x p covariance of sqrt(n) beta_hat under the chosen convention.
Eigen::MatrixXd beta_sandwich(const dpd::SandwichPair& s, BetaBlock block);

struct TestResult {
  double statistic = 0.0;
  Eigen::Index df = 0;
  double p_value = 1.0;
  double alpha_dpd = 0.0;
  /// M beta_hat - m0.
  Eigen::VectorXd residual;
};

/// Wald-type statistic at an arbitrary parameter value.
TestResult wald_test_at(const Dataset& data, const Link& link, const ParamVector& theta,
                        double alpha, const LinearHypothesis& hyp,
                        BetaBlock block = BetaBlock::leading);

/// Same, from a precomputed sandwich at beta.
TestResult wald_test_at(const dpd::SandwichPair& s, Eigen::Index n, const Eigen::VectorXd& beta,
                        double alpha, const LinearHypothesis& hyp,
                        BetaBlock block = BetaBlock::leading);

/// Requires a converged fit; throws ModelError otherwise.
TestResult wald_test(const FitResult& fit, const LinearHypothesis& hyp, const Dataset& data,
                     BetaBlock block = BetaBlock::leading);

struct OneSidedResult {
  double statistic = 0.0;
  /// 1 - Phi(statistic), for H1: beta_j > 0.
  double p_value = 0.5;
};

OneSidedResult wald_test_onesided(const FitResult& fit, Eigen::Index j, const Dataset& data,
                                  BetaBlock block = BetaBlock::leading);

/// Upper chi-square quantile chi2_{r, level}.
double chi_square_critical(Eigen::Index df, double level);

/// Noncentrality d^T M^T Sigma^-1 M d at theta0 for local alternatives beta0 + d / sqrt(n).
double noncentrality(const Dataset& design, const Link& link, const ParamVector& theta0,
                     double alpha, const LinearHypothesis& hyp, const Eigen::VectorXd& d,
                     BetaBlock block = BetaBlock::leading);

/// Asymptotic power 1 - F_{chi2_r(delta)}(chi2_{r, level}). Requires M beta0 = m0.
double contiguous_power(const Dataset& design, const Link& link, const ParamVector& theta0,
                        double alpha, const LinearHypothesis& hyp, const Eigen::VectorXd& d,
                        double level = 0.05, BetaBlock block = BetaBlock::leading);

/// Influence function of the MDPDE when observation i0 is contaminated at t:
/// Psi^-1 v(t) in (beta, phi) coordinates. This is n times the derivative of
/// the functional with respect to the contamination weight on slot i0.
Eigen::VectorXd estimator_influence(const Dataset& design, const Link& link,
                                    const ParamVector& theta, Eigen::Index i0, double t,
                                    double alpha);

/// Contamination of every slot, slot i at t[i].
Eigen::VectorXd estimator_influence_all(const Dataset& design, const Link& link,
                                        const ParamVector& theta, std::span<const double> t,
                                        double alpha);

/// IF_beta^T M^T Sigma^-1 M IF_beta; the first-order IF of the test is identically 0.
double test_influence_second_order(const Dataset& design, const Link& link,
                                   const ParamVector& theta, Eigen::Index i0, double t,
                                   const LinearHypothesis& hyp, double alpha,
                                   BetaBlock block = BetaBlock::leading);

/// `points` values equispaced on the logit scale over [edge, 1 - edge].
std::vector<double> influence_grid(std::size_t points = 400, double edge = 1e-6);

struct InfluenceReport {
  Eigen::Index i0 = 0;
  double alpha = 0.0;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> values;
  /// Max over the grid of the Euclidean norm of the IF.
  double sup_norm = 0.0;
  /// Empty unless a hypothesis was supplied.
  std::vector<double> second_order_test;
};

InfluenceReport influence_report(const Dataset& design, const Link& link,
                                 const ParamVector& theta, Eigen::Index i0, double alpha,
                                 std::span<const double> grid,
                                 const std::optional<LinearHypothesis>& hyp = std::nullopt,
                                 BetaBlock block = BetaBlock::leading);

}  // namespace betadpd
