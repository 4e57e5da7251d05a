#include "betadpd/dpd_terms.hpp"

#include <cmath>
#include <string>

#include "betadpd/error.hpp"
#include "betadpd/specfun.hpp"

namespace betadpd::dpd {
namespace {

void require_feasible(double mu, double phi, double alpha) {
  const TiltedShape s = tilted_shape(mu, phi, alpha);
  if (!(s.a > 0.0 && s.b > 0.0)) {
    throw DivergentIntegralError(
        "integral of f^(1+alpha) diverges at mu=" + std::to_string(mu) +
        ", phi=" + std::to_string(phi) + ", alpha=" + std::to_string(alpha) +
        " (need min(mu phi, (1-mu) phi) > alpha/(1+alpha))");
  }
}

}  // namespace

TiltedShape tilted_shape(double mu, double phi, double alpha) {
  return {(1.0 + alpha) * mu * phi - alpha, (1.0 + alpha) * (1.0 - mu) * phi - alpha};
}

bool is_feasible(double mu, double phi, double alpha, double margin) {
  const TiltedShape s = tilted_shape(mu, phi, alpha);
  return s.a > margin && s.b > margin;
}

double log_k_integral(double mu, double phi, double alpha) {
  require_feasible(mu, phi, alpha);
  if (alpha == 0.0) return 0.0;
  const TiltedShape s = tilted_shape(mu, phi, alpha);
  return specfun::log_beta(s.a, s.b) -
         (1.0 + alpha) * specfun::log_beta(mu * phi, (1.0 - mu) * phi);
}

double k_integral(double mu, double phi, double alpha) {
  return std::exp(log_k_integral(mu, phi, alpha));
}

ScoreCentres score_centres(double mu, double phi) {
  const double psi_b = specfun::digamma((1.0 - mu) * phi);
  return {specfun::digamma(mu * phi) - psi_b, psi_b - specfun::digamma(phi)};
}

MomentTerms moment_terms(double mu, double phi, double alpha, bool second_order) {
  require_feasible(mu, phi, alpha);
  const TiltedShape s = tilted_shape(mu, phi, alpha);
  const ScoreCentres c = score_centres(mu, phi);

  MomentTerms m;
  m.k = alpha == 0.0 ? 1.0 : std::exp(log_k_integral(mu, phi, alpha));

  const double psi_a = specfun::digamma(s.a);
  const double psi_b = specfun::digamma(s.b);
  const double psi_ab = specfun::digamma(s.a + s.b);
  // Means of y*_1 - mu*_1 and y*_2 - mu*_2 under Beta(a, b); both vanish at alpha = 0.
  const double d1 = alpha == 0.0 ? 0.0 : (psi_a - psi_b) - c.mu1;
  const double d2 = alpha == 0.0 ? 0.0 : (psi_b - psi_ab) - c.mu2;

  m.xi_mu = m.k * phi * d1;
  m.xi_phi = m.k * (mu * d1 + d2);
  if (!second_order) return m;

  const double t_a = specfun::trigamma(s.a);
  const double t_b = specfun::trigamma(s.b);
  const double t_ab = specfun::trigamma(s.a + s.b);
  // E[(y*_1 - mu*_1)^2], E[(y*_1 - mu*_1)(y*_2 - mu*_2)], E[(y*_2 - mu*_2)^2] under Beta(a, b).
  const double e11 = t_a + t_b + d1 * d1;
  const double e12 = -t_b + d1 * d2;
  const double e22 = t_b - t_ab + d2 * d2;

  m.j_mumu = m.k * phi * phi * e11;
  m.j_muphi = m.k * phi * (mu * e11 + e12);
  m.j_phiphi = m.k * (mu * mu * e11 + 2.0 * mu * e12 + e22);
  return m;
}

GammaTerms gamma_terms(double mu, double phi, double alpha, double link_deriv) {
  const MomentTerms m = moment_terms(mu, phi, alpha, true);
  return {m.k,
          m.xi_mu / link_deriv,
          m.xi_phi,
          m.j_mumu / (link_deriv * link_deriv),
          m.j_muphi / link_deriv,
          m.j_phiphi};
}

PointScore point_score(double logit_y, double log1m_y, double mu, double phi) {
  const double a = mu * phi;
  const double b = (1.0 - mu) * phi;
  const double log_y = logit_y + log1m_y;
  const double log_density =
      -specfun::log_beta(a, b) + (a - 1.0) * log_y + (b - 1.0) * log1m_y;
  const ScoreCentres c = score_centres(mu, phi);
  const double r1 = logit_y - c.mu1;
  const double r2 = log1m_y - c.mu2;
  return {log_density, phi * r1, mu * r1 + r2};
}

}  // namespace betadpd::dpd
