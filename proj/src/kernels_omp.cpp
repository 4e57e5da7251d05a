#include <algorithm>

#include "betadpd/kernels.hpp"

namespace betadpd::kernels {

std::ptrdiff_t dpd_values_omp(const ObservationView& obs, double alpha, double margin,
                              bool with_derivatives, std::span<ObsValue> out) {
  const auto n = static_cast<std::ptrdiff_t>(obs.size());
  std::ptrdiff_t first = n;
#pragma omp parallel for schedule(static) reduction(min : first)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!detail::dpd_value_one(obs.logit_y[i], obs.log1m_y[i], obs.mu[i], obs.phi[i], alpha,
                               margin, with_derivatives, out[i])) {
      first = std::min(first, i);
    }
  }
  return first == n ? kNoFailure : first;
}

std::ptrdiff_t moments_omp(std::span<const double> mu, std::span<const double> phi,
                           double alpha, std::span<dpd::MomentTerms> out) {
  const auto n = static_cast<std::ptrdiff_t>(mu.size());
  std::ptrdiff_t first = n;
#pragma omp parallel for schedule(static) reduction(min : first)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!detail::moment_one(mu[i], phi[i], alpha, out[i])) first = std::min(first, i);
  }
  return first == n ? kNoFailure : first;
}

}  // namespace betadpd::kernels
