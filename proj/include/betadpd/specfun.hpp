#pragma once

// Scalar special functions used by the beta density and every closed-form
// DPD integral. All functions are pure and reentrant; they throw
// betadpd::DomainError for arguments <= 0 or non-finite.

namespace betadpd::specfun {

/// ln Gamma(x), x > 0.
double log_gamma(double x);

/// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
/// Large arguments go through the Stirling remainder so that ln B stays
/// accurate when one argument is much larger than the other. Symmetric in
/// (a, b) bit for bit.
double log_beta(double a, double b);

/// psi(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);

/// psi_1(x) = d^2/dx^2 ln Gamma(x), x > 0.
double trigamma(double x);

}  // namespace betadpd::specfun
