#pragma once

// Per-observation DPD kernels. Each kernel fills one output slot per
// observation; callers reduce the slots in index order, so the serial and
// OpenMP variants produce bit-identical sums. The serial variants are the
// reference implementation used by the tests and the benchmark.

#include <cstddef>
#include <span>

#include "betadpd/dpd_terms.hpp"

namespace betadpd::kernels {

enum class Exec { serial, parallel, automatic };

/// Observations with n >= this go parallel under Exec::automatic.
inline constexpr std::size_t kParallelThreshold = 2048;

/// Per-observation inputs. All spans have length n.
struct ObservationView {
  std::span<const double> logit_y;
  std::span<const double> log1m_y;
  std::span<const double> mu;
  std::span<const double> phi;
  std::size_t size() const { return mu.size(); }
};

/// h_i = K_i - (1+alpha)/alpha (f_i(y_i)^alpha - 1)   (alpha > 0)
/// h_i = -ln f_i(y_i)                                (alpha = 0)
/// together with dh_i/dmu_i and dh_i/dphi_i. The objective is
/// mean(h) - (1+alpha)/alpha for alpha > 0 and 1 + mean(h) at alpha = 0;
/// splitting off the constant keeps h accurate as alpha -> 0.
struct ObsValue {
  double h = 0.0;
  double dh_dmu = 0.0;
  double dh_dphi = 0.0;
};

/// Value of kNoFailure means every observation was feasible.
inline constexpr std::ptrdiff_t kNoFailure = -1;

/// Returns the smallest index whose tilted shapes fall at or below `margin`
/// (its slot holds h = +inf), or kNoFailure.
std::ptrdiff_t dpd_values_serial(const ObservationView& obs, double alpha, double margin,
                                 bool with_derivatives, std::span<ObsValue> out);
std::ptrdiff_t dpd_values_omp(const ObservationView& obs, double alpha, double margin,
                              bool with_derivatives, std::span<ObsValue> out);
std::ptrdiff_t dpd_values(const ObservationView& obs, double alpha, double margin,
                          bool with_derivatives, std::span<ObsValue> out, Exec exec);

/// Moment terms at (mu_i, phi_i, alpha); same failure convention.
std::ptrdiff_t moments_serial(std::span<const double> mu, std::span<const double> phi,
                              double alpha, std::span<dpd::MomentTerms> out);
std::ptrdiff_t moments_omp(std::span<const double> mu, std::span<const double> phi,
                           double alpha, std::span<dpd::MomentTerms> out);
std::ptrdiff_t moments(std::span<const double> mu, std::span<const double> phi, double alpha,
                       std::span<dpd::MomentTerms> out, Exec exec);

/// Resolves Exec::automatic for a batch of n observations.
bool use_parallel(std::size_t n, Exec exec);

namespace detail {
/// Single-observation body shared by both variants. Never throws.
bool dpd_value_one(double logit_y, double log1m_y, double mu, double phi, double alpha,
                   double margin, bool with_derivatives, ObsValue& out) noexcept;
bool moment_one(double mu, double phi, double alpha, dpd::MomentTerms& out) noexcept;
}  // namespace detail

}  // namespace betadpd::kernels
