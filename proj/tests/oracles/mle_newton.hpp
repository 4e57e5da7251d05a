#pragma once

// Beta-regression maximum likelihood by Newton-Raphson on the observed
// information, logit link, (beta, phi) coordinates. Independent of the
// library: own start, own derivatives, boost special functions.

#include <cmath>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace oracle {

struct MleResult {
  Eigen::VectorXd beta;
  double phi = 0.0;
  double score_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline double beta_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& beta, double phi) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = 1.0 / (1.0 + std::exp(-x.row(i).dot(beta)));
    const double p = mu * phi, q = (1 - mu) * phi;
    ll += std::lgamma(phi) - std::lgamma(p) - std::lgamma(q) + (p - 1) * std::log(y[i]) +
          (q - 1) * std::log1p(-y[i]);
  }
  return ll;
}

/// Score and observed Hessian of the log-likelihood.
inline void beta_loglik_derivs(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& beta, double phi, Eigen::VectorXd& s,
                               Eigen::MatrixXd& h) {
  using boost::math::digamma;
  using boost::math::trigamma;
  const Eigen::Index p = x.cols(), d = p + 1;
  s = Eigen::VectorXd::Zero(d);
  h = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = 1.0 / (1.0 + std::exp(-x.row(i).dot(beta)));
    const double a = mu * phi, b = (1 - mu) * phi;
    const double ystar = std::log(y[i] / (1 - y[i]));
    const double mustar = digamma(a) - digamma(b);
    const double t1 = trigamma(a), t2 = trigamma(b);
    const double l_mu = phi * (ystar - mustar);
    const double l_phi = mu * (ystar - mustar) + std::log1p(-y[i]) - digamma(b) + digamma(phi);
    const double l_mumu = -phi * phi * (t1 + t2);
    const double l_muphi = (ystar - mustar) - phi * (mu * t1 - (1 - mu) * t2);
    const double l_phiphi = trigamma(phi) - mu * mu * t1 - (1 - mu) * (1 - mu) * t2;
    const double dm = mu * (1 - mu);                // d mu / d eta
    const double d2m = mu * (1 - mu) * (1 - 2 * mu);  // d^2 mu / d eta^2
    const Eigen::VectorXd xi = x.row(i).transpose();
    s.head(p) += l_mu * dm * xi;
    s[p] += l_phi;
    h.topLeftCorner(p, p) += (l_mumu * dm * dm + l_mu * d2m) * xi * xi.transpose();
    h.col(p).head(p) += l_muphi * dm * xi;
    h(p, p) += l_phiphi;
  }
  h.row(p).head(p) = h.col(p).head(p).transpose();
}

inline MleResult beta_mle_newton(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  const Eigen::Index p = x.cols();
  Eigen::VectorXd ly(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) ly[i] = std::log(y[i] / (1 - y[i]));
  MleResult r;
  r.beta = x.householderQr().solve(ly);
  r.phi = 10.0;
  double ll = beta_loglik(y, x, r.beta, r.phi);
  for (r.iterations = 0; r.iterations < 200; ++r.iterations) {
    Eigen::VectorXd s;
    Eigen::MatrixXd h;
    beta_loglik_derivs(y, x, r.beta, r.phi, s, h);
    r.score_norm = s.lpNorm<Eigen::Infinity>() / static_cast<double>(y.size());
    if (r.score_norm < 1e-12) {
      r.converged = true;
      break;
    }
    Eigen::VectorXd step = h.ldlt().solve(-s);
    if (s.dot(step) <= 0.0) step = s / static_cast<double>(y.size());  // not an ascent direction
    double t = 1.0;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const Eigen::VectorXd nb = r.beta + t * step.head(p);
      const double nphi = r.phi + t * step[p];
      if (!(nphi > 0.0)) continue;
      const double nll = beta_loglik(y, x, nb, nphi);
      if (std::isfinite(nll) && nll >= ll - 1e-12 * std::abs(ll)) {
        r.beta = nb;
        r.phi = nphi;
        ll = nll;
        break;
      }
    }
  }
  return r;
}

}  // namespace oracle
