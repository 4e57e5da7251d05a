#pragma once

// Closed-form per-observation DPD quantities for one Beta(mu phi, (1-mu) phi)
// density. Raising the density to 1 + alpha gives, up to the constant K, the
// Beta(a, b) density with
//   a = (1 + alpha) mu phi - alpha,   b = (1 + alpha)(1 - mu) phi - alpha,
// so every integral of (score)^k f^{1+alpha} reduces to digamma/trigamma
// moments of ln y and ln(1 - y) under Beta(a, b).

namespace betadpd::dpd {

/// Margin used by the optimizer: shapes below it are treated as infeasible.
inline constexpr double kFeasibilityMargin = 1e-8;

struct TiltedShape {
  double a;
  double b;
};

TiltedShape tilted_shape(double mu, double phi, double alpha);

/// True when both tilted shapes exceed `margin`.
bool is_feasible(double mu, double phi, double alpha, double margin = 0.0);

/// ln K = ln B(a, b) - (1 + alpha) ln B(mu phi, (1 - mu) phi).
/// Throws DivergentIntegralError when a <= 0 or b <= 0.
double log_k_integral(double mu, double phi, double alpha);

/// K = integral over (0,1) of f(y; mu, phi)^{1+alpha} dy.
double k_integral(double mu, double phi, double alpha);

/// mu*_1 = psi(mu phi) - psi((1-mu) phi),  mu*_2 = psi((1-mu) phi) - psi(phi).
struct ScoreCentres {
  double mu1;
  double mu2;
};
ScoreCentres score_centres(double mu, double phi);

/// Integrals of the (mu, phi)-scale scores against f^{1+alpha}:
///   xi_mu    = int d_mu ln f  f^{1+alpha},      xi_phi = int d_phi ln f  f^{1+alpha}
///   j_mumu   = int (d_mu ln f)^2 f^{1+alpha},   and so on.
/// With d_mu ln f = phi (y*_1 - mu*_1) and d_phi ln f = mu (y*_1 - mu*_1) + (y*_2 - mu*_2).
struct MomentTerms {
  double k = 1.0;
  double xi_mu = 0.0;
  double xi_phi = 0.0;
  double j_mumu = 0.0;
  double j_muphi = 0.0;
  double j_phiphi = 0.0;
};

/// Throws DivergentIntegralError when infeasible. Second moments are skipped
/// unless `second_order` is set.
MomentTerms moment_terms(double mu, double phi, double alpha, bool second_order = true);

/// The five gamma terms on the linear-predictor scale for mean link
/// derivative g'(mu):
///   g1 = xi_mu / g',  g2 = xi_phi,  g11 = j_mumu / g'^2,  g12 = j_muphi / g',  g22 = j_phiphi.
struct GammaTerms {
  double k;
  double g1;
  double g2;
  double g11;
  double g12;
  double g22;
};
GammaTerms gamma_terms(double mu, double phi, double alpha, double link_deriv);

/// Scores of one observation at (mu, phi), given y*_1 and y*_2.
struct PointScore {
  double log_density;
  double u_mu;
  double u_phi;
};
PointScore point_score(double logit_y, double log1m_y, double mu, double phi);

}  // namespace betadpd::dpd
