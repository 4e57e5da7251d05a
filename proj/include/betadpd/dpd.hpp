#pragma once

// DPD objective, gradient and sandwich matrices for a beta regression whose
// per-observation (mu_i, phi_i) depend smoothly on a parameter vector.
// Everything is assembled from a LocalModel: the current (mu_i, phi_i) plus
// the rows d mu_i / d(mean params) and d phi_i / d(precision params). The
// fixed-dispersion model and the variable-dispersion model differ only in how
// the LocalModel is built.

#include <cstddef>

#include <Eigen/Dense>

#include "betadpd/kernels.hpp"
#include "betadpd/link.hpp"
#include "betadpd/model.hpp"

namespace betadpd::dpd {

using kernels::Exec;

/// Coordinate used for phi in the fixed-dispersion model.
enum class PrecisionCoord { phi, log_phi };

struct LocalModel {
  const Dataset* data = nullptr;
  Eigen::VectorXd mu;
  Eigen::VectorXd phi;
  Eigen::MatrixXd dmu;   // n x p
  Eigen::MatrixXd dphi;  // n x q
  Eigen::Index n() const { return mu.size(); }
  Eigen::Index dim() const { return dmu.cols() + dphi.cols(); }
};

/// dmu rows are x_i / g'(mu_i); the single dphi column is 1 (phi) or phi (log phi).
LocalModel local_model(const Dataset& data, const Link& link, const ParamVector& theta,
                       PrecisionCoord coord);

struct Evaluation {
  /// H_{n,alpha}; +inf when some observation is infeasible.
  double value = 0.0;
  /// mean(h_i), i.e. value without its alpha-only constant. Better conditioned at small alpha.
  double core = 0.0;
  Eigen::VectorXd gradient;
  std::ptrdiff_t failed = kernels::kNoFailure;
};

/// Constant added to mean(h_i) to obtain H_{n,alpha}.
double objective_offset(double alpha);

/// Never throws for infeasible points; check `failed`.
Evaluation evaluate(const LocalModel& local, double alpha, double margin, bool with_gradient,
                    Exec exec = Exec::automatic);

/// H_{n,alpha}(theta). Throws DivergentIntegralError when any tilted shape is <= 0.
double objective(const Dataset& data, const Link& link, const ParamVector& theta, double alpha,
                 Exec exec = Exec::automatic);

/// Gradient with respect to (beta, phi).
Eigen::VectorXd gradient(const Dataset& data, const Link& link, const ParamVector& theta,
                         double alpha, Exec exec = Exec::automatic);

/// Gradient with respect to (beta, log phi).
Eigen::VectorXd gradient_unconstrained(const Dataset& data, const Link& link,
                                       const ParamVector& theta, double alpha,
                                       Exec exec = Exec::automatic);

struct SandwichPair {
  Eigen::MatrixXd psi;
  Eigen::MatrixXd omega;
  Eigen::MatrixXd psi11;
  Eigen::MatrixXd omega11;
};

/// Psi_n and Omega_n in the coordinates of `local`. Throws DivergentIntegralError
/// when the tilted shapes at 2 alpha are not positive.
SandwichPair sandwich(const LocalModel& local, double alpha, Exec exec = Exec::automatic);

/// Psi_n alone; needs feasibility at alpha only. E[Hessian of H] = (1 + alpha) Psi_n at the model.
Eigen::MatrixXd psi_matrix(const LocalModel& local, double alpha, Exec exec = Exec::automatic);

/// Same, in (beta, phi) coordinates.
SandwichPair sandwich(const Dataset& data, const Link& link, const ParamVector& theta,
                      double alpha, Exec exec = Exec::automatic);

/// n^-1 Psi^-1 Omega Psi^-1. Throws SingularMatrixError when Psi is not positive definite.
Eigen::MatrixXd covariance(const SandwichPair& s, Eigen::Index n);

/// Psi^-1, or SingularMatrixError.
Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& m, const char* what);

}  // namespace betadpd::dpd
