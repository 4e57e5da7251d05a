#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/digamma.hpp>

#include "betadpd/dpd.hpp"
#include "betadpd/error.hpp"
#include "betadpd/vardisp.hpp"
#include "oracles/fd.hpp"
#include "oracles/quadrature.hpp"
#include "support.hpp"

using namespace betadpd;

namespace {

Dataset with_intercept_precision(const Dataset& d) {
  return d.with_precision_design(Eigen::MatrixXd::Ones(d.n(), 1));
}

Eigen::VectorXd stack(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd v(a.size() + b.size());
  v << a, b;
  return v;
}

/// Variable-dispersion data: logit mean on [1, x], log precision on [1, x].
Dataset vd_sample(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma,
                  std::uint64_t seed, int rep) {
  RngStream rng(seed, static_cast<std::uint64_t>(rep), StreamTag::response);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mu = 1.0 / (1.0 + std::exp(-x.row(i).dot(beta)));
    const double phi = std::exp(x.row(i).dot(gamma));
    y[i] = rng.beta(mu * phi, (1 - mu) * phi);
  }
  return Dataset(y, x, {}, x);
}

}  // namespace

TEST_CASE("intercept-only precision reduces to the fixed-dispersion objective and gradient") {
  const Dataset d = with_intercept_precision(testsupport::seed1());
  const VarDispSpec spec = VarDispSpec::linear(d);
  const ParamVector t(Eigen::Vector2d(-1, 1), 5.0);
  const Eigen::VectorXd th = stack(t.beta(), Eigen::VectorXd::Constant(1, std::log(5.0)));
  for (double a : {0.0, 0.3, 0.8}) {
    const double fixed = dpd::objective(d, Link{}, t, a);
    CHECK(std::abs(vd_objective(d, spec, th, a) - fixed) <= 1e-12 * std::abs(fixed));
    const Eigen::VectorXd g = vd_gradient(d, spec, th, a);
    const Eigen::VectorXd gf = dpd::gradient(d, Link{}, t, a);
    CHECK((g.head(2) - gf.head(2)).lpNorm<Eigen::Infinity>() <= 1e-13);
    CHECK(std::abs(g[2] - gf[2] * 5.0) <= 1e-12);  // chain rule through phi = exp(gamma)
  }
}

TEST_CASE("alpha = 0 objective and gradient are the likelihood forms") {
  const Dataset d = testsupport::stress_anxiety();
  const VarDispSpec spec = VarDispSpec::linear(d);
  const Eigen::VectorXd th = (Eigen::VectorXd(4) << -2.0, 3.5, 1.5, 2.0).finished();
  double ll = 0.0;
  Eigen::VectorXd score = Eigen::VectorXd::Zero(4);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const Eigen::RowVectorXd x = d.x().row(i);
    const double mu = 1.0 / (1.0 + std::exp(-x.dot(th.head(2))));
    const double phi = std::exp(x.dot(th.tail(2)));
    const double y = d.y()[i];
    ll += std::lgamma(phi) - std::lgamma(mu * phi) - std::lgamma((1 - mu) * phi) + (mu * phi - 1) * std::log(y) +
          ((1 - mu) * phi - 1) * std::log1p(-y);
    const double r1 = std::log(y / (1 - y)) - (boost::math::digamma(mu * phi) - boost::math::digamma((1 - mu) * phi));
    const double r2 = std::log1p(-y) - (boost::math::digamma((1 - mu) * phi) - boost::math::digamma(phi));
    score.head(2) += phi * r1 * mu * (1 - mu) * x.transpose();
    score.tail(2) += (mu * r1 + r2) * phi * x.transpose();
  }
  const double n = static_cast<double>(d.n());
  CHECK(std::abs(vd_objective(d, spec, th, 0.0) - (1.0 - ll / n)) <= 1e-12 * std::abs(1.0 - ll / n));
  CHECK((vd_gradient(d, spec, th, 0.0) + score / n).lpNorm<Eigen::Infinity>() <= 1e-10);
  // and the limit from the alpha > 0 side
  const double h0 = vd_objective(d, spec, th, 0.0);
  CHECK(std::abs(vd_objective(d, spec, th, 1e-6) - h0 + 1.0 / 1e-6 + 1.0) < 1e-4);
}

TEST_CASE("K seen through the variable-dispersion objective") {
  Eigen::VectorXd y(1);
  y << 0.35;
  const Dataset d(y, Eigen::MatrixXd::Ones(1, 1), {}, Eigen::MatrixXd::Ones(1, 1));
  const VarDispSpec spec = VarDispSpec::linear(d);
  const double mu = 0.4, phi = 5.0, a = 0.5;
  const Eigen::Vector2d th(std::log(mu / (1 - mu)), std::log(phi));
  const double fa = std::exp(a * beta_log_density(0.35, mu, phi));
  const double k = vd_objective(d, spec, th, a) + (1 + 1 / a) * fa;
  const oracle::GammaReference r = oracle::gamma_reference(mu, phi, a, 1.0);
  CHECK(std::abs(k - r.k) <= 1e-8 * r.k);
  CHECK(std::abs(k - dpd::k_integral(mu, phi, a)) <= 1e-12 * r.k);
}

TEST_CASE("gradient matches finite differences on the stress-anxiety data") {
  const Dataset d = testsupport::stress_anxiety();
  const VarDispSpec spec = VarDispSpec::linear(d);
  VdFitConfig c0;
  const Eigen::VectorXd th0 = vd_fit(d, spec, c0).theta;
  const Eigen::VectorXd th1 = th0 + Eigen::Vector4d(0.05, -0.1, 0.1, 0.05);
  for (const Eigen::VectorXd& th : {th0, th1}) {
    for (double a : {0.0, 0.3}) {
      if (a > 0.0) {
        VdFitConfig c;
        c.alpha = a;
        c.compute_covariance = false;
        const Eigen::VectorXd ta = vd_fit(d, spec, c).theta;
        auto f = [&](const Eigen::VectorXd& v) { return vd_objective(d, spec, v, a); };
        for (const Eigen::VectorXd& p : {ta, Eigen::VectorXd(ta + Eigen::Vector4d(0.02, -0.03, 0.05, 0.02))}) {
          const Eigen::VectorXd g = vd_gradient(d, spec, p, a);
          const Eigen::VectorXd fd = oracle::fd_gradient(f, p);
          CHECK((g - fd).lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(g.lpNorm<Eigen::Infinity>(), 1e-3));
        }
        continue;
      }
      auto f = [&](const Eigen::VectorXd& v) { return vd_objective(d, spec, v, a); };
      const Eigen::VectorXd g = vd_gradient(d, spec, th, a);
      const Eigen::VectorXd fd = oracle::fd_gradient(f, th);
      CHECK((g - fd).lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(g.lpNorm<Eigen::Infinity>(), 1e-3));
    }
  }
}

TEST_CASE("variable-dispersion sandwich equals quadrature moment integrals") {
  const Dataset base = testsupport::seed1(8);
  const Dataset d = base.with_precision_design(base.x());
  const VarDispSpec spec = VarDispSpec::linear(d);
  const Eigen::Vector4d th(-0.6, 1.1, 1.4, 0.8);
  for (double a : {0.2, 0.45}) {
    const dpd::SandwichPair s = vd_sandwich(d, spec, th, a);
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(4, 4), omega = psi;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const Eigen::Vector2d x = d.x().row(i).transpose();
      const double mu = 1.0 / (1.0 + std::exp(-x.dot(th.head(2))));
      const double phi = std::exp(x.dot(th.tail(2)));
      Eigen::Vector4d dm, dp;
      dm << mu * (1 - mu) * x, 0, 0;
      dp << 0, 0, phi * x;
      const oracle::GammaReference r1 = oracle::gamma_reference(mu, phi, a, 1.0);
      const oracle::GammaReference r2 = oracle::gamma_reference(mu, phi, 2 * a, 1.0);
      auto block = [&](const oracle::GammaReference& r) {
        return Eigen::Matrix4d(r.j_mumu * dm * dm.transpose() + r.j_muphi * (dm * dp.transpose() + dp * dm.transpose()) +
                               r.j_phiphi * dp * dp.transpose());
      };
      const Eigen::Vector4d xi = r1.xi_mu * dm + r1.xi_phi * dp;
      psi += block(r1);
      omega += block(r2) - xi * xi.transpose();
    }
    psi /= static_cast<double>(d.n());
    omega /= static_cast<double>(d.n());
    CHECK((s.psi - psi).cwiseAbs().maxCoeff() <= 1e-7 * psi.cwiseAbs().maxCoeff());
    CHECK((s.omega - omega).cwiseAbs().maxCoeff() <= 1e-7 * omega.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("reduction law on synthetic datasets") {
  for (int k = 0; k < 10; ++k) {
    const Dataset d = with_intercept_precision(testsupport::seed1(60 + 10 * k, 300 + k));
    const VarDispSpec spec = VarDispSpec::linear(d);
    for (double a : {0.0, 0.3}) {
      FitConfig fc;
      fc.alpha = a;
      VdFitConfig vc;
      vc.alpha = a;
      const FitResult f = fit(d, Link{}, fc);
      const VdFitResult v = vd_fit(d, spec, vc);
      REQUIRE(f.converged);
      REQUIRE(v.converged);
      CHECK((v.beta() - f.theta_hat.beta()).lpNorm<Eigen::Infinity>() <= 1e-6);
      CHECK(std::abs(v.gamma()[0] - f.theta_hat.log_phi()) <= 1e-6);
    }
  }
}

TEST_CASE("stress-anxiety relative changes from deleting the outliers") {
  const Dataset d = testsupport::stress_anxiety();
  const Dataset clean = d.without_rows(testsupport::outlier_rows("stress_anxiety"));
  const double ref[2][4] = {{1.23, 1.89, 4.47, 13.65}, {0.92, 0.29, 3.41, 6.74}};
  const double alphas[2] = {0.0, 0.3};
  for (int k = 0; k < 2; ++k) {
    VdFitConfig c;
    c.alpha = alphas[k];
    const VdFitResult full = vd_fit(d, VarDispSpec::linear(d), c);
    const VdFitResult cl = vd_fit(clean, VarDispSpec::linear(clean), c);
    REQUIRE(full.converged);
    REQUIRE(cl.converged);
    for (int j = 0; j < 4; ++j) {
      const double rel = 100.0 * std::abs(full.theta[j] - cl.theta[j]) / std::abs(full.theta[j]);
      CAPTURE(alphas[k]);
      CAPTURE(j);
      CHECK(std::abs(rel - ref[k][j]) <= 0.5);
    }
  }
}

TEST_CASE("estimates are unbiased on simulated variable-dispersion data") {
  const Eigen::Index n = 200;
  Eigen::MatrixXd x(n, 2);
  RngStream dr(8, 0, StreamTag::design);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = dr.uniform();
  }
  const Eigen::Vector2d beta(-1.0, 1.0), gamma(1.5, 1.0);
  const Eigen::Vector4d truth(-1.0, 1.0, 1.5, 1.0);
  const int reps = 500;
  std::vector<Eigen::Vector4d> est;
  VdFitConfig c;
  c.alpha = 0.3;
  c.compute_covariance = false;
  for (int r = 0; r < reps; ++r) {
    const Dataset d = vd_sample(x, beta, gamma, 8, r);
    const VdFitResult f = vd_fit(d, VarDispSpec::linear(d), c);
    if (f.converged) est.emplace_back(f.theta);
  }
  REQUIRE(est.size() >= 490);
  Eigen::Vector4d mean = Eigen::Vector4d::Zero(), ss = Eigen::Vector4d::Zero();
  for (const auto& e : est) mean += e;
  mean /= static_cast<double>(est.size());
  for (const auto& e : est) ss += (e - mean).cwiseAbs2();
  const Eigen::Vector4d mcse = (ss / (est.size() - 1.0)).cwiseSqrt() / std::sqrt(static_cast<double>(est.size()));
  for (int j = 0; j < 4; ++j) {
    CAPTURE(j);
    CAPTURE(mean[j] - truth[j]);
    CAPTURE(mcse[j]);
    CHECK(std::abs(mean[j] - truth[j]) <= 3 * mcse[j]);
  }
}

TEST_CASE("custom predictors") {
  const Dataset base = testsupport::seed1(80);
  const Dataset d = base.with_precision_design(base.x());
  const Eigen::MatrixXd x = d.x();
  const Predictor lin = Predictor::custom(d.n(), 2, [x](const Eigen::VectorXd& p, Eigen::VectorXd& eta, Eigen::MatrixXd& j) {
    eta = x * p;
    j = x;
  });
  const VarDispSpec custom{lin, Predictor::linear(d.z()), Link{}, PrecisionLink{}};
  const VarDispSpec linear = VarDispSpec::linear(d);
  CHECK_THROWS_AS(vd_initial_estimate(d, custom), ModelError);
  VdFitConfig c;
  c.alpha = 0.2;
  const VdFitResult ref = vd_fit(d, linear, c);
  c.start = vd_initial_estimate(d, linear);
  const VdFitResult got = vd_fit(d, custom, c);
  CHECK((got.theta - ref.theta).lpNorm<Eigen::Infinity>() <= 1e-6);

  // A genuinely non-linear mean: eta = b0 + b1 * x^b2 with its Jacobian.
  const Predictor power = Predictor::custom(d.n(), 3, [x](const Eigen::VectorXd& p, Eigen::VectorXd& eta, Eigen::MatrixXd& j) {
    eta.resize(x.rows());
    j.resize(x.rows(), 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double xp = std::pow(x(i, 1), p[2]);
      eta[i] = p[0] + p[1] * xp;
      j(i, 0) = 1.0;
      j(i, 1) = xp;
      j(i, 2) = p[1] * xp * std::log(x(i, 1));
    }
  });
  const VarDispSpec nl{power, Predictor::linear(d.z()), Link{}, PrecisionLink{}};
  const Eigen::VectorXd th = (Eigen::VectorXd(5) << -1.0, 1.0, 1.2, 1.5, 0.2).finished();
  auto f = [&](const Eigen::VectorXd& v) { return vd_objective(d, nl, v, 0.3); };
  const Eigen::VectorXd g = vd_gradient(d, nl, th, 0.3);
  CHECK((g - oracle::fd_gradient(f, th)).lpNorm<Eigen::Infinity>() <= 1e-6 * g.lpNorm<Eigen::Infinity>());
  const Predictor bad = Predictor::custom(d.n(), 2, [](const Eigen::VectorXd&, Eigen::VectorXd& eta, Eigen::MatrixXd& j) {
    eta = Eigen::VectorXd::Zero(3);
    j = Eigen::MatrixXd::Zero(3, 2);
  });
  const VarDispSpec broken{bad, Predictor::linear(d.z()), Link{}, PrecisionLink{}};
  CHECK_THROWS_AS(vd_objective(d, broken, Eigen::Vector4d::Zero(), 0.0), ModelError);
}

TEST_CASE("precision links other than log") {
  const Dataset base = testsupport::seed1(80);
  const Dataset d = base.with_precision_design(base.x());
  for (auto kind : {PrecisionLink::Kind::sqrt, PrecisionLink::Kind::identity}) {
    const VarDispSpec spec = VarDispSpec::linear(d, Link{}, PrecisionLink(kind));
    VdFitConfig c;
    c.alpha = 0.2;
    const VdFitResult r = vd_fit(d, spec, c);
    CHECK(r.converged);
    auto f = [&](const Eigen::VectorXd& v) { return vd_objective(d, spec, v, 0.2); };
    const Eigen::VectorXd p = r.theta + Eigen::Vector4d(0.01, 0.02, 0.03, -0.02);
    const Eigen::VectorXd g = vd_gradient(d, spec, p, 0.2);
    CHECK((g - oracle::fd_gradient(f, p)).lpNorm<Eigen::Infinity>() <= 1e-6 * g.lpNorm<Eigen::Infinity>());
  }
  CHECK_THROWS_AS(VarDispSpec::linear(base), ModelError);
}
