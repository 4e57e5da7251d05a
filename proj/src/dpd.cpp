#include "betadpd/dpd.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "betadpd/error.hpp"

namespace betadpd::dpd {
namespace {

void require_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw DomainError("tuning parameter alpha must be finite and >= 0");
  }
}

kernels::ObservationView view_of(const LocalModel& local) {
  const Dataset& d = *local.data;
  const auto n = static_cast<std::size_t>(local.n());
  return {{d.logit_y().data(), n}, {d.log1m_y().data(), n}, {local.mu.data(), n},
          {local.phi.data(), n}};
}

[[noreturn]] void throw_divergent(const LocalModel& local, std::ptrdiff_t i, double alpha) {
  throw DivergentIntegralError(
      "integral of f^(1+alpha) diverges at observation " + std::to_string(i + 1) +
      " (mu=" + std::to_string(local.mu[i]) + ", phi=" + std::to_string(local.phi[i]) +
      ", alpha=" + std::to_string(alpha) + ")");
}

// Sum_i w_i r_i c_i^T over the rows of r (n x k) and c (n x l).
Eigen::MatrixXd weighted_cross(const Eigen::MatrixXd& r, const Eigen::VectorXd& w,
                               const Eigen::MatrixXd& c) {
  return r.transpose() * (c.array().colwise() * w.array()).matrix();
}

}  // namespace

LocalModel local_model(const Dataset& data, const Link& link, const ParamVector& theta,
                       PrecisionCoord coord) {
  if (theta.p() != data.p()) throw ModelError("coefficient length differs from design columns");
  LocalModel local;
  local.data = &data;
  local.mu = mean_vector(data, link, theta);
  const double phi = theta.phi();
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw NonFinitePredictorError("precision is not a positive finite number");
  }
  local.phi = Eigen::VectorXd::Constant(data.n(), phi);
  local.dmu.resize(data.n(), data.p());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    local.dmu.row(i) = data.x().row(i) / link.deriv(local.mu[i]);
  }
  local.dphi = Eigen::MatrixXd::Constant(data.n(), 1, coord == PrecisionCoord::phi ? 1.0 : phi);
  return local;
}

double objective_offset(double alpha) { return alpha == 0.0 ? 1.0 : -(1.0 + alpha) / alpha; }

Evaluation evaluate(const LocalModel& local, double alpha, double margin, bool with_gradient,
                    Exec exec) {
  require_alpha(alpha);
  const Eigen::Index n = local.n();
  std::vector<kernels::ObsValue> slots(static_cast<std::size_t>(n));
  Evaluation out;
  out.failed = kernels::dpd_values(view_of(local), alpha, margin, with_gradient, slots, exec);
  if (out.failed != kernels::kNoFailure) {
    out.value = out.core = std::numeric_limits<double>::infinity();
    return out;
  }
  double sum = 0.0;
  for (const auto& s : slots) sum += s.h;
  out.core = sum / static_cast<double>(n);
  out.value = out.core + objective_offset(alpha);
  if (with_gradient) {
    Eigen::VectorXd g_mu(n), g_phi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      g_mu[i] = slots[i].dh_dmu;
      g_phi[i] = slots[i].dh_dphi;
    }
    out.gradient.resize(local.dim());
    out.gradient.head(local.dmu.cols()) = local.dmu.transpose() * g_mu / static_cast<double>(n);
    out.gradient.tail(local.dphi.cols()) = local.dphi.transpose() * g_phi / static_cast<double>(n);
  }
  return out;
}

double objective(const Dataset& data, const Link& link, const ParamVector& theta, double alpha,
                 Exec exec) {
  const LocalModel local = local_model(data, link, theta, PrecisionCoord::phi);
  const Evaluation e = evaluate(local, alpha, 0.0, false, exec);
  if (e.failed != kernels::kNoFailure) throw_divergent(local, e.failed, alpha);
  return e.value;
}

Eigen::VectorXd gradient(const Dataset& data, const Link& link, const ParamVector& theta,
                         double alpha, Exec exec) {
  const LocalModel local = local_model(data, link, theta, PrecisionCoord::phi);
  Evaluation e = evaluate(local, alpha, 0.0, true, exec);
  if (e.failed != kernels::kNoFailure) throw_divergent(local, e.failed, alpha);
  return std::move(e.gradient);
}

Eigen::VectorXd gradient_unconstrained(const Dataset& data, const Link& link,
                                       const ParamVector& theta, double alpha, Exec exec) {
  const LocalModel local = local_model(data, link, theta, PrecisionCoord::log_phi);
  Evaluation e = evaluate(local, alpha, 0.0, true, exec);
  if (e.failed != kernels::kNoFailure) throw_divergent(local, e.failed, alpha);
  return std::move(e.gradient);
}

namespace {

std::vector<MomentTerms> moments_at(const LocalModel& local, double alpha, Exec exec) {
  const auto un = static_cast<std::size_t>(local.n());
  std::vector<MomentTerms> m(un);
  const std::ptrdiff_t bad = kernels::moments({local.mu.data(), un}, {local.phi.data(), un},
                                              alpha, m, exec);
  if (bad != kernels::kNoFailure) throw_divergent(local, bad, alpha);
  return m;
}

Eigen::MatrixXd assemble_blocks(const LocalModel& local, const Eigen::VectorXd& s11,
                                const Eigen::VectorXd& s12, const Eigen::VectorXd& s22) {
  const Eigen::Index p = local.dmu.cols();
  const Eigen::Index q = local.dphi.cols();
  Eigen::MatrixXd m(p + q, p + q);
  m.topLeftCorner(p, p) = weighted_cross(local.dmu, s11, local.dmu);
  m.topRightCorner(p, q) = weighted_cross(local.dmu, s12, local.dphi);
  m.bottomLeftCorner(q, p) = m.topRightCorner(p, q).transpose();
  m.bottomRightCorner(q, q) = weighted_cross(local.dphi, s22, local.dphi);
  m /= static_cast<double>(local.n());
  return 0.5 * (m + m.transpose());
}

}  // namespace

Eigen::MatrixXd psi_matrix(const LocalModel& local, double alpha, Exec exec) {
  require_alpha(alpha);
  const std::vector<MomentTerms> m = moments_at(local, alpha, exec);
  const Eigen::Index n = local.n();
  Eigen::VectorXd j11(n), j12(n), j22(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    j11[i] = m[i].j_mumu;
    j12[i] = m[i].j_muphi;
    j22[i] = m[i].j_phiphi;
  }
  return assemble_blocks(local, j11, j12, j22);
}

SandwichPair sandwich(const LocalModel& local, double alpha, Exec exec) {
  require_alpha(alpha);
  const Eigen::Index n = local.n();
  const std::vector<MomentTerms> m1 = moments_at(local, alpha, exec);
  const std::vector<MomentTerms> m2 = alpha == 0.0 ? m1 : moments_at(local, 2.0 * alpha, exec);

  Eigen::VectorXd j11(n), j12(n), j22(n), w11(n), w12(n), w22(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const MomentTerms& a = m1[i];
    const MomentTerms& b = m2[i];
    j11[i] = a.j_mumu;
    j12[i] = a.j_muphi;
    j22[i] = a.j_phiphi;
    w11[i] = b.j_mumu - a.xi_mu * a.xi_mu;
    w12[i] = b.j_muphi - a.xi_mu * a.xi_phi;
    w22[i] = b.j_phiphi - a.xi_phi * a.xi_phi;
  }

  const Eigen::Index p = local.dmu.cols();
  SandwichPair s;
  s.psi = assemble_blocks(local, j11, j12, j22);
  s.omega = assemble_blocks(local, w11, w12, w22);
  s.psi11 = s.psi.topLeftCorner(p, p);
  s.omega11 = s.omega.topLeftCorner(p, p);
  return s;
}

SandwichPair sandwich(const Dataset& data, const Link& link, const ParamVector& theta,
                      double alpha, Exec exec) {
  return sandwich(local_model(data, link, theta, PrecisionCoord::phi), alpha, exec);
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError(std::string(what) + " is not positive definite");
  }
  // Reject numerically singular matrices that LLT still factors.
  const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
  if (d.minCoeff() <= 1e-12 * d.maxCoeff()) {
    throw SingularMatrixError(std::string(what) + " is numerically singular");
  }
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  return 0.5 * (inv + inv.transpose());
}

Eigen::MatrixXd covariance(const SandwichPair& s, Eigen::Index n) {
  const Eigen::MatrixXd pinv = inverse_spd(s.psi, "Psi");
  const Eigen::MatrixXd c = pinv * s.omega * pinv / static_cast<double>(n);
  return 0.5 * (c + c.transpose());
}

}  // namespace betadpd::dpd
