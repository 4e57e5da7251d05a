#include "betadpd/model.hpp"

#include <algorithm>
#include <cmath>

#include "betadpd/error.hpp"
#include "betadpd/specfun.hpp"

namespace betadpd {
namespace {

std::vector<std::string> default_names(Eigen::Index k, const char* prefix) {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < k; ++j) out.push_back(prefix + std::to_string(j + 1));
  return out;
}

Eigen::MatrixXd drop_rows(const Eigen::MatrixXd& m, const std::vector<bool>& keep,
                          Eigen::Index kept) {
  Eigen::MatrixXd out(kept, m.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (keep[i]) out.row(r++) = m.row(i);
  }
  return out;
}

}  // namespace

Eigen::Index column_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  return qr.rank();
}

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd x, std::vector<std::string> x_names,
                 std::optional<Eigen::MatrixXd> z, std::vector<std::string> z_names)
    : y_(std::move(y)),
      x_(std::move(x)),
      z_(std::move(z)),
      x_names_(std::move(x_names)),
      z_names_(std::move(z_names)) {
  const Eigen::Index n = y_.size();
  if (n == 0) throw ModelError("dataset has no observations");
  if (x_.rows() != n) {
    throw ModelError("design has " + std::to_string(x_.rows()) + " rows but there are " +
                     std::to_string(n) + " responses");
  }
  if (x_.cols() == 0 || x_.cols() > n) throw ModelError("design must have 1..n columns");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(y_[i] > 0.0 && y_[i] < 1.0)) {
      throw DomainError("response " + std::to_string(i + 1) + " = " + std::to_string(y_[i]) +
                        " is not in (0, 1)");
    }
  }
  if (!x_.allFinite()) throw ModelError("design contains non-finite values");
  if (column_rank(x_) < x_.cols()) throw ModelError("mean design is rank deficient");
  if (z_) {
    if (z_->rows() != n) throw ModelError("precision design row count differs from n");
    if (z_->cols() == 0) throw ModelError("precision design has no columns");
    if (!z_->allFinite()) throw ModelError("precision design contains non-finite values");
    if (column_rank(*z_) < z_->cols()) throw ModelError("precision design is rank deficient");
    if (z_names_.empty()) z_names_ = default_names(z_->cols(), "z");
  }
  if (x_names_.empty()) x_names_ = default_names(x_.cols(), "x");
  if (static_cast<Eigen::Index>(x_names_.size()) != x_.cols()) {
    throw ModelError("covariate name count differs from design columns");
  }
  logit_y_.resize(n);
  log1m_y_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    log1m_y_[i] = std::log1p(-y_[i]);
    logit_y_[i] = std::log(y_[i]) - log1m_y_[i];
  }
}

const Eigen::MatrixXd& Dataset::z() const {
  if (!z_) throw ModelError("dataset has no precision design");
  return *z_;
}

Dataset Dataset::without_rows(std::span<const Eigen::Index> rows) const {
  std::vector<bool> keep(n(), true);
  for (auto r : rows) {
    if (r < 0 || r >= n()) throw ModelError("row index out of range");
    keep[r] = false;
  }
  const Eigen::Index kept = std::count(keep.begin(), keep.end(), true);
  Eigen::VectorXd y2(kept);
  for (Eigen::Index i = 0, r = 0; i < n(); ++i) {
    if (keep[i]) y2[r++] = y_[i];
  }
  std::optional<Eigen::MatrixXd> z2;
  if (z_) z2 = drop_rows(*z_, keep, kept);
  return Dataset(std::move(y2), drop_rows(x_, keep, kept), x_names_, std::move(z2), z_names_);
}

Dataset Dataset::with_responses(Eigen::VectorXd y) const {
  return Dataset(std::move(y), x_, x_names_, z_, z_names_);
}

Dataset Dataset::with_precision_design(Eigen::MatrixXd z, std::vector<std::string> z_names) const {
  return Dataset(y_, x_, x_names_, std::move(z), std::move(z_names));
}

ParamVector::ParamVector(Eigen::VectorXd beta, double phi) : beta_(std::move(beta)) {
  if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("precision phi must be positive");
  log_phi_ = std::log(phi);
}

ParamVector ParamVector::from_log_phi(Eigen::VectorXd beta, double log_phi) {
  ParamVector t;
  t.beta_ = std::move(beta);
  t.log_phi_ = log_phi;
  return t;
}

ParamVector ParamVector::from_unconstrained(const Eigen::VectorXd& v) {
  const Eigen::Index p = v.size() - 1;
  return from_log_phi(v.head(p), v[p]);
}

ParamVector ParamVector::from_natural(const Eigen::VectorXd& v) {
  const Eigen::Index p = v.size() - 1;
  return ParamVector(v.head(p), v[p]);
}

Eigen::VectorXd ParamVector::natural() const {
  Eigen::VectorXd v(p() + 1);
  v << beta_, phi();
  return v;
}

Eigen::VectorXd ParamVector::unconstrained() const {
  Eigen::VectorXd v(p() + 1);
  v << beta_, log_phi_;
  return v;
}

double beta_log_density(double y, double mu, double phi) {
  if (!(y > 0.0 && y < 1.0)) throw DomainError("beta_log_density: y must lie in (0, 1)");
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("beta_log_density: mu must lie in (0, 1)");
  if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("beta_log_density: phi must be > 0");
  const double a = mu * phi;
  const double b = (1.0 - mu) * phi;
  return -specfun::log_beta(a, b) + (a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y);
}

Eigen::VectorXd mean_vector(const Eigen::MatrixXd& x, const Link& link,
                            const Eigen::VectorXd& beta) {
  if (beta.size() != x.cols()) throw ModelError("coefficient length differs from design columns");
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (!std::isfinite(eta[i])) {
      throw NonFinitePredictorError("linear predictor is non-finite at observation " +
                                    std::to_string(i + 1));
    }
    mu[i] = link.inverse(eta[i]);
    if (!(mu[i] > 0.0 && mu[i] < 1.0)) {
      throw DomainError("mean at observation " + std::to_string(i + 1) +
                        " is not inside (0, 1) under the " + link.name() + " link");
    }
  }
  return mu;
}

Eigen::VectorXd mean_vector(const Dataset& data, const Link& link, const ParamVector& theta) {
  return mean_vector(data.x(), link, theta.beta());
}

std::vector<double> transform_response(std::span<const double> raw, double a, double b,
                                       bool boundary_rule) {
  if (!(b > a)) throw DomainError("transform_response: range must satisfy a < b");
  const double n = static_cast<double>(raw.size());
  std::vector<double> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!(v >= a && v <= b)) {
      throw DomainError("value " + std::to_string(v) + " at position " + std::to_string(i + 1) +
                        " lies outside [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    out.push_back((v - a) / (b - a));
  }
  if (boundary_rule) {
    for (double& v : out) v = (v * (n - 1.0) + 0.5) / n;
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] <= 0.0 || out[i] >= 1.0) {
        throw DomainError("value at position " + std::to_string(i + 1) +
                          " maps onto the boundary; enable the boundary adjustment");
      }
    }
  }
  return out;
}

}  // namespace betadpd
