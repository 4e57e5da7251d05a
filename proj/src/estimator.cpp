#include "betadpd/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "betadpd/dpd.hpp"
#include "betadpd/dpd_terms.hpp"
#include "betadpd/error.hpp"
#include "betadpd/rng.hpp"

namespace betadpd {
namespace {

constexpr double kPhiFloor = 0.5;
constexpr double kPhiCap = 1e6;

struct Problem {
  const Dataset& data;
  const Link& link;
  double alpha;
  kernels::Exec exec;

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* g) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!x.allFinite()) return inf;
    try {
      const ParamVector theta = ParamVector::from_unconstrained(x);
      const dpd::LocalModel local =
          dpd::local_model(data, link, theta, dpd::PrecisionCoord::log_phi);
      dpd::Evaluation e = dpd::evaluate(local, alpha, dpd::kFeasibilityMargin, g != nullptr, exec);
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

// Max-norm over both precision coordinates, so a converged fit is stationary in either.
double stationarity(const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
  const Eigen::Index p = g.size() - 1;
  double m = g.head(p).size() ? g.head(p).cwiseAbs().maxCoeff() : 0.0;
  m = std::max(m, std::abs(g[p]));
  m = std::max(m, std::abs(g[p] * std::exp(-x[p])));
  return m;
}

std::optional<Eigen::MatrixXd> seed_inverse_hessian(const Problem& prob, const Eigen::VectorXd& x) {
  try {
    const ParamVector theta = ParamVector::from_unconstrained(x);
    const dpd::LocalModel local =
        dpd::local_model(prob.data, prob.link, theta, dpd::PrecisionCoord::log_phi);
    const Eigen::MatrixXd psi = dpd::psi_matrix(local, prob.alpha, prob.exec);
    return dpd::inverse_spd((1.0 + prob.alpha) * psi, "Psi");
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

OptimResult run_from(const Problem& prob, const Eigen::VectorXd& x0, const OptimOptions& opts) {
  return minimize_bfgs(std::cref(prob), x0, opts, seed_inverse_hessian(prob, x0));
}

// Deterministic perturbations of the start point for the restarts.
std::vector<Eigen::VectorXd> jittered_starts(const Eigen::VectorXd& x0, double alpha, int count) {
  const auto bits = std::bit_cast<std::uint64_t>(alpha);
  RngStream rng(bits, 0, StreamTag::jitter);
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd x = x0;
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] += 0.1 * (1.0 + std::abs(x0[j])) * rng.normal();
    out.push_back(std::move(x));
  }
  return out;
}

bool better(const OptimResult& a, const OptimResult& b) {
  if (a.converged != b.converged) return a.converged;
  return a.f < b.f;
}

}  // namespace

Eigen::VectorXd FitResult::standard_errors() const {
  const Eigen::Index k = theta_hat.p() + 1;
  if (!covariance_available) return Eigen::VectorXd::Constant(k, std::nan(""));
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

ParamVector initial_estimate(const Dataset& data, const Link& link) {
  return initial_estimate(data.y(), data.x(), link);
}

ParamVector initial_estimate(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Link& link) {
  const Eigen::Index n = y.size();
  const Eigen::Index p = x.cols();
  if (x.rows() != n) throw ModelError("design rows differ from the number of responses");
  Eigen::VectorXd gy(n);
  for (Eigen::Index i = 0; i < n; ++i) gy[i] = link.fun(y[i]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) throw ModelError("design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(gy);
  const Eigen::VectorXd mu = mean_vector(x, link, beta);
  const double dof = static_cast<double>(n > p ? n - p : n);
  const double sigma2 = (y - mu).squaredNorm() / dof;
  const double spread = (mu.array() * (1.0 - mu.array())).mean();
  double phi = sigma2 > 0.0 ? spread / sigma2 - 1.0 : kPhiCap;
  if (!std::isfinite(phi)) phi = kPhiCap;
  phi = std::clamp(phi, kPhiFloor, kPhiCap);
  return ParamVector(beta, phi);
}

FitResult fit(const Dataset& data, const Link& link, const FitConfig& config) {
  if (!(config.alpha >= 0.0) || !std::isfinite(config.alpha)) {
    throw DomainError("tuning parameter alpha must be finite and >= 0");
  }
  if (!(config.gradient_tolerance > 0.0) || config.max_iterations <= 0 ||
      config.step_halvings_max < 0) {
    throw DomainError("fit tolerances must be positive");
  }
  ParamVector start = config.warm_start ? *config.warm_start : initial_estimate(data, link);
  if (start.p() != data.p()) throw ModelError("warm start has the wrong number of coefficients");

  const Problem prob{data, link, config.alpha, config.exec};
  if (!config.warm_start && config.alpha > 0.0 && !std::isfinite(prob(start.unconstrained(), nullptr))) {
    // The moment start can sit outside the feasible region; the ML fit rarely does.
    FitConfig ml = config;
    ml.alpha = 0.0;
    ml.compute_covariance = false;
    const FitResult m = fit(data, link, ml);
    if (m.converged) start = m.theta_hat;
  }
  const Eigen::VectorXd x0 = start.unconstrained();
  if (!std::isfinite(prob(x0, nullptr))) {
    // Surface the precise reason (divergent integral or bad predictor).
    dpd::objective(data, link, start, config.alpha, config.exec);
    throw DivergentIntegralError("alpha = " + std::to_string(config.alpha) +
                                 " is infeasible at the start point");
  }

  OptimOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.gradient_tolerance = config.gradient_tolerance;
  opts.max_halvings = config.step_halvings_max;
  opts.stationarity = stationarity;

  OptimResult best = run_from(prob, x0, opts);
  if (config.alpha >= config.restart_alpha && config.restarts > 0) {
    for (const Eigen::VectorXd& xs : jittered_starts(x0, config.alpha, config.restarts)) {
      if (!std::isfinite(prob(xs, nullptr))) continue;
      OptimResult r = run_from(prob, xs, opts);
      if (better(r, best)) best = std::move(r);
    }
  }

  FitResult out;
  out.theta_hat = ParamVector::from_unconstrained(best.x);
  out.link = link;
  out.alpha = config.alpha;
  out.n = data.n();
  out.objective_value = best.f + dpd::objective_offset(config.alpha);
  out.gradient_norm = best.gradient_norm;
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.message = best.message;
  out.trace = std::move(best.trace);
  for (auto& t : out.trace) t.objective += dpd::objective_offset(config.alpha);

  if (config.compute_covariance) {
    try {
      const dpd::SandwichPair s =
          dpd::sandwich(data, link, out.theta_hat, config.alpha, config.exec);
      out.covariance = dpd::covariance(s, data.n());
      out.covariance_available = true;
    } catch (const ModelError& e) {
      out.covariance = Eigen::MatrixXd::Constant(data.p() + 1, data.p() + 1, std::nan(""));
      out.message += std::string("; covariance unavailable: ") + e.what();
    }
  }
  return out;
}

std::vector<PathPoint> fit_alpha_path(const Dataset& data, const Link& link,
                                      std::span<const double> alphas, const FitConfig& base) {
  if (!std::is_sorted(alphas.begin(), alphas.end())) {
    throw DomainError("alpha path must be sorted ascending");
  }
  std::vector<PathPoint> out;
  FitConfig cfg = base;
  for (double a : alphas) {
    PathPoint pt;
    pt.alpha = a;
    cfg.alpha = a;
    try {
      try {
        pt.fit = fit(data, link, cfg);
      } catch (const DivergentIntegralError&) {
        if (!cfg.warm_start) throw;
        // Warm start is infeasible at this alpha; start afresh.
        FitConfig fresh = cfg;
        fresh.warm_start.reset();
        pt.fit = fit(data, link, fresh);
      }
      if (pt.fit->converged) cfg.warm_start = pt.fit->theta_hat;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace betadpd
