#include "betadpd/vardisp.hpp"

#include <cmath>
#include <limits>
#include <bit>
#include <cstdint>

#include "betadpd/dpd_terms.hpp"
#include "betadpd/error.hpp"
#include "betadpd/rng.hpp"

namespace betadpd {
namespace {

void check_theta(const VarDispSpec& spec, const Eigen::VectorXd& theta) {
  if (theta.size() != spec.p() + spec.q()) {
    throw ModelError("parameter vector must have p + q = " + std::to_string(spec.p() + spec.q()) +
                     " entries");
  }
}

struct VdProblem {
  const Dataset& data;
  const VarDispSpec& spec;
  double alpha;

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* g) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!x.allFinite()) return inf;
    try {
      const dpd::LocalModel local = vd_local_model(data, spec, x);
      dpd::Evaluation e = dpd::evaluate(local, alpha, dpd::kFeasibilityMargin, g != nullptr);
      if (e.failed != kernels::kNoFailure) return inf;
      if (g) *g = std::move(e.gradient);
      return e.core;
    } catch (const ModelError&) {
      return inf;
    } catch (const DomainError&) {
      return inf;
    }
  }
};

std::optional<Eigen::MatrixXd> seed_inverse_hessian(const VdProblem& prob,
                                                    const Eigen::VectorXd& x) {
  try {
    const dpd::LocalModel local = vd_local_model(prob.data, prob.spec, x);
    return dpd::inverse_spd((1.0 + prob.alpha) * dpd::psi_matrix(local, prob.alpha), "Psi");
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

Predictor Predictor::linear(Eigen::MatrixXd design) {
  Predictor p;
  p.n_ = design.rows();
  p.k_ = design.cols();
  p.linear_ = std::move(design);
  return p;
}

Predictor Predictor::custom(Eigen::Index n, Eigen::Index parameters, Evaluate eval) {
  if (!eval) throw ModelError("custom predictor needs an evaluation callback");
  Predictor p;
  p.n_ = n;
  p.k_ = parameters;
  p.eval_ = std::move(eval);
  return p;
}

void Predictor::evaluate(const Eigen::VectorXd& params, Eigen::VectorXd& eta,
                         Eigen::MatrixXd& jac) const {
  if (params.size() != k_) throw ModelError("predictor parameter length mismatch");
  if (linear_) {
    eta = *linear_ * params;
    jac = *linear_;
    return;
  }
  eval_(params, eta, jac);
  if (eta.size() != n_ || jac.rows() != n_ || jac.cols() != k_) {
    throw ModelError("custom predictor returned arrays of the wrong shape");
  }
}

VarDispSpec VarDispSpec::linear(const Dataset& data, Link link, PrecisionLink plink) {
  if (!data.has_precision_design()) {
    throw ModelError("variable-dispersion model needs a precision design Z");
  }
  return {Predictor::linear(data.x()), Predictor::linear(data.z()), link, plink};
}

dpd::LocalModel vd_local_model(const Dataset& data, const VarDispSpec& spec,
                               const Eigen::VectorXd& theta) {
  check_theta(spec, theta);
  const Eigen::Index n = data.n();
  if (spec.mean.observations() != n || spec.precision.observations() != n) {
    throw ModelError("predictor length differs from the number of observations");
  }
  Eigen::VectorXd eta1, eta2;
  Eigen::MatrixXd j1, j2;
  spec.mean.evaluate(theta.head(spec.p()), eta1, j1);
  spec.precision.evaluate(theta.tail(spec.q()), eta2, j2);

  dpd::LocalModel local;
  local.data = &data;
  local.mu.resize(n);
  local.phi.resize(n);
  local.dmu.resize(n, spec.p());
  local.dphi.resize(n, spec.q());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(eta1[i]) || !std::isfinite(eta2[i])) {
      throw NonFinitePredictorError("predictor is non-finite at observation " +
                                    std::to_string(i + 1));
    }
    const double mu = spec.link.inverse(eta1[i]);
    if (!(mu > 0.0 && mu < 1.0)) {
      throw DomainError("mean at observation " + std::to_string(i + 1) + " is not inside (0, 1)");
    }
    const double phi = spec.precision_link.inverse(eta2[i]);
    local.mu[i] = mu;
    local.phi[i] = phi;
    local.dmu.row(i) = j1.row(i) / spec.link.deriv(mu);
    local.dphi.row(i) = j2.row(i) / spec.precision_link.deriv(phi);
  }
  return local;
}

double vd_objective(const Dataset& data, const VarDispSpec& spec, const Eigen::VectorXd& theta,
                    double alpha) {
  const dpd::LocalModel local = vd_local_model(data, spec, theta);
  const dpd::Evaluation e = dpd::evaluate(local, alpha, 0.0, false);
  if (e.failed != kernels::kNoFailure) {
    throw DivergentIntegralError("integral of f^(1+alpha) diverges at observation " +
                                 std::to_string(e.failed + 1));
  }
  return e.value;
}

Eigen::VectorXd vd_gradient(const Dataset& data, const VarDispSpec& spec,
                            const Eigen::VectorXd& theta, double alpha) {
  const dpd::LocalModel local = vd_local_model(data, spec, theta);
  dpd::Evaluation e = dpd::evaluate(local, alpha, 0.0, true);
  if (e.failed != kernels::kNoFailure) {
    throw DivergentIntegralError("integral of f^(1+alpha) diverges at observation " +
                                 std::to_string(e.failed + 1));
  }
  return std::move(e.gradient);
}

dpd::SandwichPair vd_sandwich(const Dataset& data, const VarDispSpec& spec,
                              const Eigen::VectorXd& theta, double alpha) {
  return dpd::sandwich(vd_local_model(data, spec, theta), alpha);
}

Eigen::VectorXd VdFitResult::standard_errors() const {
  if (!covariance_available) return Eigen::VectorXd::Constant(p + q, std::nan(""));
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

Eigen::VectorXd vd_initial_estimate(const Dataset& data, const VarDispSpec& spec) {
  if (!spec.mean.is_linear() || !spec.precision.is_linear()) {
    throw ModelError("non-linear predictors need an explicit start point");
  }
  const ParamVector fixed = initial_estimate(data.y(), spec.mean.design(), spec.link);
  const Eigen::MatrixXd& z = spec.precision.design();
  const Eigen::VectorXd target =
      Eigen::VectorXd::Constant(z.rows(), spec.precision_link.fun(fixed.phi()));
  Eigen::VectorXd theta(spec.p() + spec.q());
  theta.head(spec.p()) = fixed.beta();
  theta.tail(spec.q()) = z.colPivHouseholderQr().solve(target);
  return theta;
}

VdFitResult vd_fit(const Dataset& data, const VarDispSpec& spec, const VdFitConfig& config) {
  if (!(config.alpha >= 0.0) || !std::isfinite(config.alpha)) {
    throw DomainError("tuning parameter alpha must be finite and >= 0");
  }
  Eigen::VectorXd x0 = config.start ? *config.start : vd_initial_estimate(data, spec);
  check_theta(spec, x0);
  const VdProblem prob{data, spec, config.alpha};
  if (!config.start && config.alpha > 0.0 && !std::isfinite(prob(x0, nullptr))) {
    // The moment start can sit outside the feasible region; the ML fit rarely does.
    VdFitConfig ml = config;
    ml.alpha = 0.0;
    ml.compute_covariance = false;
    const VdFitResult m = vd_fit(data, spec, ml);
    if (m.converged) x0 = m.theta;
  }
  if (!std::isfinite(prob(x0, nullptr))) {
    vd_objective(data, spec, x0, config.alpha);
    throw DivergentIntegralError("alpha = " + std::to_string(config.alpha) +
                                 " is infeasible at the start point");
  }

  OptimOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.gradient_tolerance = config.gradient_tolerance;
  opts.max_halvings = config.step_halvings_max;

  auto run = [&](const Eigen::VectorXd& xs) {
    return minimize_bfgs(std::cref(prob), xs, opts, seed_inverse_hessian(prob, xs));
  };
  OptimResult best = run(x0);
  if (config.alpha >= config.restart_alpha && config.restarts > 0) {
    RngStream rng(std::bit_cast<std::uint64_t>(config.alpha), 1, StreamTag::jitter);
    for (int k = 0; k < config.restarts; ++k) {
      Eigen::VectorXd xs = x0;
      for (Eigen::Index j = 0; j < xs.size(); ++j) xs[j] += 0.1 * (1.0 + std::abs(x0[j])) * rng.normal();
      if (!std::isfinite(prob(xs, nullptr))) continue;
      OptimResult r = run(xs);
      if ((r.converged && !best.converged) || (r.converged == best.converged && r.f < best.f)) {
        best = std::move(r);
      }
    }
  }

  VdFitResult out;
  out.theta = best.x;
  out.p = spec.p();
  out.q = spec.q();
  out.alpha = config.alpha;
  out.objective_value = best.f + dpd::objective_offset(config.alpha);
  out.gradient_norm = best.gradient_norm;
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.message = best.message;
  out.trace = std::move(best.trace);
  for (auto& t : out.trace) t.objective += dpd::objective_offset(config.alpha);
  if (config.compute_covariance) {
    try {
      out.covariance = dpd::covariance(vd_sandwich(data, spec, out.theta, config.alpha), data.n());
      out.covariance_available = true;
    } catch (const ModelError& e) {
      out.covariance = Eigen::MatrixXd::Constant(out.p + out.q, out.p + out.q, std::nan(""));
      out.message += std::string("; covariance unavailable: ") + e.what();
    }
  }
  return out;
}

}  // namespace betadpd
