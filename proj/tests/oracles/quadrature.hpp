#pragma once

// Integrals against the beta density by adaptive tanh-sinh quadrature. The
// interval is split around the bulk of f^{1+alpha} so that sharply peaked
// densities (phi in the hundreds) are resolved. Nothing here uses the
// closed forms under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "mp_specfun.hpp"

namespace oracle {

struct BetaDensity {
  double mu, phi, log_b;
  BetaDensity(double mu_, double phi_) : mu(mu_), phi(phi_), log_b(log_beta50(mu_ * phi_, (1 - mu_) * phi_)) {}
  /// ym = 1 - y, passed separately so that it keeps full precision near y = 1.
  double log_f(double y, double ym) const {
    return -log_b + (mu * phi - 1.0) * std::log(y) + ((1.0 - mu) * phi - 1.0) * std::log(ym);
  }
  double log_f(double y) const { return log_f(y, 1.0 - y); }
  double mean() const { return mu; }
  double sd() const { return std::sqrt(mu * (1 - mu) / (1 + phi)); }
};

using Integrand = std::function<double(double y, double ym)>;

/// int_0^1 g(y, 1 - y) dy, with breakpoints around centre and at 1/2. Pieces
/// above 1/2 are integrated in w = 1 - y.
inline double integrate01(const Integrand& g, double centre, double width) {
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
  std::vector<double> pts{0.0, 0.5, 1.0};
  for (double k : {-6.0, -2.0, 0.0, 2.0, 6.0}) pts.push_back(std::clamp(centre + k * width, 0.0, 1.0));
  std::sort(pts.begin(), pts.end());
  auto safe = [&](double y, double ym) {
    if (!(y > 0.0) || !(ym > 0.0)) return 0.0;
    const double v = g(y, ym);
    return std::isfinite(v) ? v : 0.0;
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double lo = pts[k], hi = pts[k + 1];
    if (!(hi > lo)) continue;
    if (hi <= 0.5) {
      auto fn = [&](double y) { return safe(y, 1.0 - y); };
      total += ts.integrate(fn, lo, hi, 1e-14);
    } else {
      auto fn = [&](double w) { return safe(1.0 - w, w); };
      total += ts.integrate(fn, 1.0 - hi, 1.0 - lo, 1e-14);
    }
  }
  return total;
}

/// int_0^1 w(y, 1 - y) f(y)^power dy.
inline double integrate_power(const BetaDensity& d, double power, const Integrand& w) {
  auto g = [&](double y, double ym) { return w(y, ym) * std::exp(power * d.log_f(y, ym)); };
  return integrate01(g, d.mean(), d.sd());
}

/// Raw scores d/dmu ln f and d/dphi ln f at y, from 50-digit digamma values.
struct Scores {
  double mu, phi, c1, c2;  // c1 = mu*_1, c2 = mu*_2
  Scores(double mu_, double phi_) : mu(mu_), phi(phi_) {
    c1 = static_cast<double>(digamma50(mu * phi) - digamma50((1 - mu) * phi));
    c2 = static_cast<double>(digamma50((1 - mu) * phi) - digamma50(phi));
  }
  double u_mu(double y, double ym) const { return phi * (std::log(y) - std::log(ym) - c1); }
  double u_phi(double y, double ym) const { return mu * (std::log(y) - std::log(ym) - c1) + (std::log(ym) - c2); }
  double u_mu(double y) const { return u_mu(y, 1.0 - y); }
  double u_phi(double y) const { return u_phi(y, 1.0 - y); }
};

/// Quadrature values of K, the five gamma terms, and the raw score moments.
struct GammaReference {
  double k, g1, g2, g11, g12, g22;
  double xi_mu, xi_phi, j_mumu, j_muphi, j_phiphi;
};

inline GammaReference gamma_reference(double mu, double phi, double alpha, double link_deriv) {
  const BetaDensity d(mu, phi);
  const Scores s(mu, phi);
  const double power = 1.0 + alpha;
  GammaReference r{};
  r.k = integrate_power(d, power, [](double, double) { return 1.0; });
  r.xi_mu = integrate_power(d, power, [&](double y, double ym) { return s.u_mu(y, ym); });
  r.xi_phi = integrate_power(d, power, [&](double y, double ym) { return s.u_phi(y, ym); });
  r.j_mumu = integrate_power(d, power, [&](double y, double ym) { return s.u_mu(y, ym) * s.u_mu(y, ym); });
  r.j_muphi = integrate_power(d, power, [&](double y, double ym) { return s.u_mu(y, ym) * s.u_phi(y, ym); });
  r.j_phiphi = integrate_power(d, power, [&](double y, double ym) { return s.u_phi(y, ym) * s.u_phi(y, ym); });
  r.g1 = r.xi_mu / link_deriv;
  r.g2 = r.xi_phi;
  r.g11 = r.j_mumu / (link_deriv * link_deriv);
  r.g12 = r.j_muphi / link_deriv;
  r.g22 = r.j_phiphi;
  return r;
}

}  // namespace oracle
