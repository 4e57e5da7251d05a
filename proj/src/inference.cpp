#include "betadpd/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "betadpd/dpd_terms.hpp"
#include "betadpd/error.hpp"

namespace betadpd {
namespace {

Eigen::MatrixXd inverse_general(const Eigen::MatrixXd& m, const char* what) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw SingularMatrixError(std::string(what) + " is singular");
  return lu.inverse();
}

// Sigma = M V M^T with V the beta covariance convention.
Eigen::MatrixXd hypothesis_sigma(const dpd::SandwichPair& s, const LinearHypothesis& hyp,
                                 BetaBlock block) {
  const Eigen::MatrixXd v = beta_sandwich(s, block);
  Eigen::MatrixXd sigma = hyp.m * v * hyp.m.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

double chi_square_upper(double w, Eigen::Index df) {
  if (!(w > 0.0)) return 1.0;
  boost::math::chi_squared_distribution<double> chi(static_cast<double>(df));
  return boost::math::cdf(boost::math::complement(chi, w));
}

// Score-like vector v(t) for slot i0: [(u_mu f^a - xi_mu) x/g' ; u_phi f^a - xi_phi].
Eigen::VectorXd contamination_vector(const dpd::LocalModel& local, Eigen::Index i0, double t,
                                     double alpha) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("contamination point must lie in (0, 1)");
  if (i0 < 0 || i0 >= local.n()) throw DomainError("contamination slot out of range");
  const double mu = local.mu[i0];
  const double phi = local.phi[i0];
  const double log1m_t = std::log1p(-t);
  const double logit_t = std::log(t) - log1m_t;
  const dpd::PointScore ps = dpd::point_score(logit_t, log1m_t, mu, phi);
  const dpd::MomentTerms m = dpd::moment_terms(mu, phi, alpha, false);
  const double fa = alpha == 0.0 ? 1.0 : std::exp(alpha * ps.log_density);
  const double c_mu = ps.u_mu * fa - m.xi_mu;
  const double c_phi = ps.u_phi * fa - m.xi_phi;
  Eigen::VectorXd v(local.dim());
  v.head(local.dmu.cols()) = c_mu * local.dmu.row(i0).transpose();
  v.tail(local.dphi.cols()) = c_phi * local.dphi.row(i0).transpose();
  return v;
}

}  // namespace

LinearHypothesis LinearHypothesis::coefficient(Eigen::Index p, Eigen::Index j, double value) {
  if (j < 0 || j >= p) throw ModelError("coefficient index out of range");
  LinearHypothesis h;
  h.m = Eigen::MatrixXd::Zero(1, p);
  h.m(0, j) = 1.0;
  h.m0 = Eigen::VectorXd::Constant(1, value);
  return h;
}

void LinearHypothesis::validate(Eigen::Index p) const {
  if (m.cols() != p) {
    throw ModelError("hypothesis matrix has " + std::to_string(m.cols()) +
                     " columns, expected " + std::to_string(p));
  }
  if (m.rows() < 1 || m.rows() > p) throw ModelError("hypothesis must have 1..p rows");
  if (m0.size() != m.rows()) throw ModelError("m0 length differs from the number of rows of M");
  if (column_rank(m.transpose()) < m.rows()) throw ModelError("hypothesis matrix is rank deficient");
}

Eigen::MatrixXd beta_sandwich(const dpd::SandwichPair& s, BetaBlock block) {
  const Eigen::Index p = s.psi11.rows();
  if (block == BetaBlock::leading) {
    const Eigen::MatrixXd pinv = dpd::inverse_spd(s.psi11, "Psi11");
    const Eigen::MatrixXd v = pinv * s.omega11 * pinv;
    return 0.5 * (v + v.transpose());
  }
  const Eigen::MatrixXd pinv = dpd::inverse_spd(s.psi, "Psi");
  const Eigen::MatrixXd v = (pinv * s.omega * pinv).topLeftCorner(p, p);
  return 0.5 * (v + v.transpose());
}

TestResult wald_test_at(const dpd::SandwichPair& s, Eigen::Index n, const Eigen::VectorXd& beta,
                        double alpha, const LinearHypothesis& hyp, BetaBlock block) {
  hyp.validate(beta.size());
  const Eigen::MatrixXd sigma = hypothesis_sigma(s, hyp, block);
  TestResult r;
  r.residual = hyp.m * beta - hyp.m0;
  const Eigen::VectorXd z = inverse_general(sigma, "hypothesis covariance") * r.residual;
  r.statistic = std::max(0.0, static_cast<double>(n) * r.residual.dot(z));
  r.df = hyp.rows();
  r.p_value = chi_square_upper(r.statistic, r.df);
  r.alpha_dpd = alpha;
  return r;
}

TestResult wald_test_at(const Dataset& data, const Link& link, const ParamVector& theta,
                        double alpha, const LinearHypothesis& hyp, BetaBlock block) {
  hyp.validate(data.p());
  return wald_test_at(dpd::sandwich(data, link, theta, alpha), data.n(), theta.beta(), alpha, hyp,
                      block);
}

TestResult wald_test(const FitResult& fit, const LinearHypothesis& hyp, const Dataset& data,
                     BetaBlock block) {
  if (!fit.converged) throw ModelError("Wald-type test needs a converged fit");
  return wald_test_at(data, fit.link, fit.theta_hat, fit.alpha, hyp, block);
}

OneSidedResult wald_test_onesided(const FitResult& fit, Eigen::Index j, const Dataset& data,
                                  BetaBlock block) {
  if (!fit.converged) throw ModelError("Wald-type test needs a converged fit");
  if (j < 0 || j >= data.p()) throw ModelError("coefficient index out of range");
  const dpd::SandwichPair s = dpd::sandwich(data, fit.link, fit.theta_hat, fit.alpha);
  const double sigma = beta_sandwich(s, block)(j, j);
  if (!(sigma > 0.0)) throw SingularMatrixError("coefficient variance is not positive");
  OneSidedResult r;
  r.statistic = std::sqrt(static_cast<double>(data.n())) * fit.theta_hat.beta()[j] / std::sqrt(sigma);
  const boost::math::normal_distribution<double> nd;
  r.p_value = boost::math::cdf(boost::math::complement(nd, r.statistic));
  return r;
}

double chi_square_critical(Eigen::Index df, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("test level must lie in (0, 1)");
  boost::math::chi_squared_distribution<double> chi(static_cast<double>(df));
  return boost::math::quantile(boost::math::complement(chi, level));
}

double noncentrality(const Dataset& design, const Link& link, const ParamVector& theta0,
                     double alpha, const LinearHypothesis& hyp, const Eigen::VectorXd& d,
                     BetaBlock block) {
  hyp.validate(design.p());
  if (d.size() != design.p()) throw ModelError("direction d must have length p");
  const Eigen::VectorXd resid = hyp.m * theta0.beta() - hyp.m0;
  if (resid.cwiseAbs().maxCoeff() > 1e-10 * (1.0 + hyp.m0.cwiseAbs().maxCoeff())) {
    throw DomainError("theta0 does not satisfy the null hypothesis");
  }
  const dpd::SandwichPair s = dpd::sandwich(design, link, theta0, alpha);
  const Eigen::MatrixXd sigma = hypothesis_sigma(s, hyp, block);
  const Eigen::VectorXd md = hyp.m * d;
  return std::max(0.0, md.dot(inverse_general(sigma, "hypothesis covariance") * md));
}

double contiguous_power(const Dataset& design, const Link& link, const ParamVector& theta0,
                        double alpha, const LinearHypothesis& hyp, const Eigen::VectorXd& d,
                        double level, BetaBlock block) {
  const double delta = noncentrality(design, link, theta0, alpha, hyp, d, block);
  const double crit = chi_square_critical(hyp.rows(), level);
  const auto df = static_cast<double>(hyp.rows());
  if (delta == 0.0) {
    boost::math::chi_squared_distribution<double> chi(df);
    return boost::math::cdf(boost::math::complement(chi, crit));
  }
  boost::math::non_central_chi_squared_distribution<double> nc(df, delta);
  return boost::math::cdf(boost::math::complement(nc, crit));
}

Eigen::VectorXd estimator_influence(const Dataset& design, const Link& link,
                                    const ParamVector& theta, Eigen::Index i0, double t,
                                    double alpha) {
  const dpd::LocalModel local = dpd::local_model(design, link, theta, dpd::PrecisionCoord::phi);
  const Eigen::MatrixXd pinv = dpd::inverse_spd(dpd::psi_matrix(local, alpha), "Psi");
  return pinv * contamination_vector(local, i0, t, alpha);
}

Eigen::VectorXd estimator_influence_all(const Dataset& design, const Link& link,
                                        const ParamVector& theta, std::span<const double> t,
                                        double alpha) {
  if (static_cast<Eigen::Index>(t.size()) != design.n()) {
    throw DomainError("need one contamination point per observation");
  }
  const dpd::LocalModel local = dpd::local_model(design, link, theta, dpd::PrecisionCoord::phi);
  const Eigen::MatrixXd pinv = dpd::inverse_spd(dpd::psi_matrix(local, alpha), "Psi");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(local.dim());
  for (Eigen::Index i = 0; i < design.n(); ++i) {
    v += contamination_vector(local, i, t[static_cast<std::size_t>(i)], alpha);
  }
  return pinv * v;
}

double test_influence_second_order(const Dataset& design, const Link& link,
                                   const ParamVector& theta, Eigen::Index i0, double t,
                                   const LinearHypothesis& hyp, double alpha, BetaBlock block) {
  hyp.validate(design.p());
  const Eigen::VectorXd inf = estimator_influence(design, link, theta, i0, t, alpha);
  const dpd::SandwichPair s = dpd::sandwich(design, link, theta, alpha);
  const Eigen::MatrixXd sigma = hypothesis_sigma(s, hyp, block);
  const Eigen::VectorXd mi = hyp.m * inf.head(design.p());
  return std::max(0.0, mi.dot(inverse_general(sigma, "hypothesis covariance") * mi));
}

std::vector<double> influence_grid(std::size_t points, double edge) {
  if (points < 2) throw DomainError("influence grid needs at least two points");
  if (!(edge > 0.0 && edge < 0.5)) throw DomainError("grid edge must lie in (0, 0.5)");
  const double lo = std::log(edge) - std::log1p(-edge);
  std::vector<double> t(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double eta = lo + (-2.0 * lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    t[k] = 1.0 / (1.0 + std::exp(-eta));
  }
  return t;
}

InfluenceReport influence_report(const Dataset& design, const Link& link,
                                 const ParamVector& theta, Eigen::Index i0, double alpha,
                                 std::span<const double> grid,
                                 const std::optional<LinearHypothesis>& hyp, BetaBlock block) {
  const dpd::LocalModel local = dpd::local_model(design, link, theta, dpd::PrecisionCoord::phi);
  const Eigen::MatrixXd pinv = dpd::inverse_spd(dpd::psi_matrix(local, alpha), "Psi");
  Eigen::MatrixXd quad;
  if (hyp) {
    hyp->validate(design.p());
    const dpd::SandwichPair s = dpd::sandwich(local, alpha);
    quad = hyp->m.transpose() * inverse_general(hypothesis_sigma(s, *hyp, block),
                                                "hypothesis covariance") * hyp->m;
  }
  InfluenceReport r;
  r.i0 = i0;
  r.alpha = alpha;
  r.t.assign(grid.begin(), grid.end());
  for (double t : grid) {
    Eigen::VectorXd v = pinv * contamination_vector(local, i0, t, alpha);
    r.sup_norm = std::max(r.sup_norm, v.norm());
    if (hyp) {
      const Eigen::VectorXd b = v.head(design.p());
      r.second_order_test.push_back(std::max(0.0, b.dot(quad * b)));
    }
    r.values.push_back(std::move(v));
  }
  return r;
}

}  // namespace betadpd
