#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "betadpd/link.hpp"

namespace betadpd {

/// Responses in (0,1) with a fixed mean design X (n x p) and, for the
/// variable-dispersion model, a precision design Z (n x q). Immutable after
/// construction; the constructor validates ranges and column rank.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::vector<std::string> x_names = {},
          std::optional<Eigen::MatrixXd> z = std::nullopt, std::vector<std::string> z_names = {});

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index p() const { return x_.cols(); }
  Eigen::Index q() const { return z_ ? z_->cols() : 0; }

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }
  bool has_precision_design() const { return z_.has_value(); }
  const Eigen::MatrixXd& z() const;
  const std::vector<std::string>& x_names() const { return x_names_; }
  const std::vector<std::string>& z_names() const { return z_names_; }

  /// y*_1 = ln(y / (1 - y)) and y*_2 = ln(1 - y), cached per observation.
  const Eigen::VectorXd& logit_y() const { return logit_y_; }
  const Eigen::VectorXd& log1m_y() const { return log1m_y_; }

  /// Copy with the given 0-based rows removed.
  Dataset without_rows(std::span<const Eigen::Index> rows) const;
  /// Copy with responses replaced (same designs).
  Dataset with_responses(Eigen::VectorXd y) const;
  /// Copy whose precision design is Z (used to build variable-dispersion fits).
  Dataset with_precision_design(Eigen::MatrixXd z, std::vector<std::string> z_names = {}) const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
  std::optional<Eigen::MatrixXd> z_;
  std::vector<std::string> x_names_;
  std::vector<std::string> z_names_;
  Eigen::VectorXd logit_y_;
  Eigen::VectorXd log1m_y_;
};

/// theta = (beta, phi) for the fixed-dispersion model. Stored with log phi,
/// which is the coordinate the optimizer works in.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(Eigen::VectorXd beta, double phi);
  static ParamVector from_log_phi(Eigen::VectorXd beta, double log_phi);
  /// From (beta, log phi) stacked into one vector.
  static ParamVector from_unconstrained(const Eigen::VectorXd& v);
  /// From (beta, phi) stacked into one vector.
  static ParamVector from_natural(const Eigen::VectorXd& v);

  const Eigen::VectorXd& beta() const { return beta_; }
  double phi() const { return std::exp(log_phi_); }
  double log_phi() const { return log_phi_; }
  /// Dispersion sigma^2 = 1 / (1 + phi).
  double sigma2() const { return 1.0 / (1.0 + phi()); }
  Eigen::Index p() const { return beta_.size(); }

  Eigen::VectorXd natural() const;
  Eigen::VectorXd unconstrained() const;

 private:
  Eigen::VectorXd beta_;
  double log_phi_ = 0.0;
};

/// ln f(y; mu, phi) for the Beta(mu phi, (1 - mu) phi) density.
double beta_log_density(double y, double mu, double phi);

/// mu_i = g^{-1}(x_i^T beta). Throws NonFinitePredictorError on overflow and
/// DomainError when the inverse link lands on {0, 1}.
Eigen::VectorXd mean_vector(const Dataset& data, const Link& link, const ParamVector& theta);
Eigen::VectorXd mean_vector(const Eigen::MatrixXd& x, const Link& link,
                            const Eigen::VectorXd& beta);

/// Maps raw values in [a, b] to (0, 1): y -> (y - a)/(b - a), then, when
/// boundary_rule is set, y -> (y (n - 1) + 0.5) / n. Values landing on 0 or 1
/// without the rule are rejected.
std::vector<double> transform_response(std::span<const double> raw, double a, double b,
                                       bool boundary_rule);

/// Numerical column rank of a design matrix.
Eigen::Index column_rank(const Eigen::MatrixXd& m);

}  // namespace betadpd
