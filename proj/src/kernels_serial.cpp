#include <cmath>
#include <limits>

#include <omp.h>

#include "betadpd/kernels.hpp"
#include "betadpd/specfun.hpp"

namespace betadpd::kernels {

namespace detail {

bool dpd_value_one(double logit_y, double log1m_y, double mu, double phi, double alpha,
                   double margin, bool with_derivatives, ObsValue& out) noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  out = ObsValue{inf, 0.0, 0.0};
  if (!(mu > 0.0 && mu < 1.0) || !(phi > 0.0) || !std::isfinite(phi)) return false;
  const double a = mu * phi;
  const double b = (1.0 - mu) * phi;
  const double ta = (1.0 + alpha) * a - alpha;
  const double tb = (1.0 + alpha) * b - alpha;
  if (!(ta > margin && tb > margin)) return false;
  try {
    const double lbeta = specfun::log_beta(a, b);
    const double log_y = logit_y + log1m_y;
    const double log_f = -lbeta + (a - 1.0) * log_y + (b - 1.0) * log1m_y;
    double k = 1.0;
    double f_alpha = 1.0;
    if (alpha == 0.0) {
      out.h = -log_f;
    } else {
      k = std::exp(specfun::log_beta(ta, tb) - (1.0 + alpha) * lbeta);
      const double f_alpha_m1 = std::expm1(alpha * log_f);
      f_alpha = 1.0 + f_alpha_m1;
      out.h = k - (1.0 + alpha) / alpha * f_alpha_m1;
    }
    if (with_derivatives) {
      const double psi_a = specfun::digamma(a);
      const double psi_b = specfun::digamma(b);
      const double mu1 = psi_a - psi_b;
      const double mu2 = psi_b - specfun::digamma(phi);
      const double r1 = logit_y - mu1;
      const double r2 = log1m_y - mu2;
      const double u_mu = phi * r1;
      const double u_phi = mu * r1 + r2;
      if (alpha == 0.0) {
        out.dh_dmu = -u_mu;
        out.dh_dphi = -u_phi;
      } else {
        const double psi_tb = specfun::digamma(tb);
        const double d1 = (specfun::digamma(ta) - psi_tb) - mu1;
        const double d2 = (psi_tb - specfun::digamma(ta + tb)) - mu2;
        out.dh_dmu = (1.0 + alpha) * (k * phi * d1 - u_mu * f_alpha);
        out.dh_dphi = (1.0 + alpha) * (k * (mu * d1 + d2) - u_phi * f_alpha);
      }
    }
  } catch (...) {
    out = ObsValue{inf, 0.0, 0.0};
    return false;
  }
  if (!std::isfinite(out.h) || !std::isfinite(out.dh_dmu) || !std::isfinite(out.dh_dphi)) {
    out = ObsValue{inf, 0.0, 0.0};
    return false;
  }
  return true;
}

bool moment_one(double mu, double phi, double alpha, dpd::MomentTerms& out) noexcept {
  if (!(mu > 0.0 && mu < 1.0) || !(phi > 0.0) || !std::isfinite(phi) ||
      !dpd::is_feasible(mu, phi, alpha)) {
    out = dpd::MomentTerms{};
    return false;
  }
  try {
    out = dpd::moment_terms(mu, phi, alpha, true);
  } catch (...) {
    out = dpd::MomentTerms{};
    return false;
  }
  return std::isfinite(out.k) && std::isfinite(out.j_phiphi);
}

}  // namespace detail

std::ptrdiff_t dpd_values_serial(const ObservationView& obs, double alpha, double margin,
                                 bool with_derivatives, std::span<ObsValue> out) {
  std::ptrdiff_t first = kNoFailure;
  const std::size_t n = obs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool ok = detail::dpd_value_one(obs.logit_y[i], obs.log1m_y[i], obs.mu[i], obs.phi[i],
                                          alpha, margin, with_derivatives, out[i]);
    if (!ok && first == kNoFailure) first = static_cast<std::ptrdiff_t>(i);
  }
  return first;
}

std::ptrdiff_t moments_serial(std::span<const double> mu, std::span<const double> phi,
                              double alpha, std::span<dpd::MomentTerms> out) {
  std::ptrdiff_t first = kNoFailure;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!detail::moment_one(mu[i], phi[i], alpha, out[i]) && first == kNoFailure) {
      first = static_cast<std::ptrdiff_t>(i);
    }
  }
  return first;
}

bool use_parallel(std::size_t n, Exec exec) {
  switch (exec) {
    case Exec::serial: return false;
    case Exec::parallel: return true;
    case Exec::automatic:
      return n >= kParallelThreshold && omp_get_level() == 0 && omp_get_max_threads() > 1;
  }
  return false;
}

std::ptrdiff_t dpd_values(const ObservationView& obs, double alpha, double margin,
                          bool with_derivatives, std::span<ObsValue> out, Exec exec) {
  if (use_parallel(obs.size(), exec)) {
    return dpd_values_omp(obs, alpha, margin, with_derivatives, out);
  }
  return dpd_values_serial(obs, alpha, margin, with_derivatives, out);
}

std::ptrdiff_t moments(std::span<const double> mu, std::span<const double> phi, double alpha,
                       std::span<dpd::MomentTerms> out, Exec exec) {
  if (use_parallel(mu.size(), exec)) return moments_omp(mu, phi, alpha, out);
  return moments_serial(mu, phi, alpha, out);
}

}  // namespace betadpd::kernels
