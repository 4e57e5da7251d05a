#include <doctest.h>

#include <cmath>
#include <random>

#include "betadpd/error.hpp"
#include "betadpd/link.hpp"
#include "betadpd/model.hpp"
#include "oracles/mp_specfun.hpp"
#include "oracles/quadrature.hpp"

using namespace betadpd;

TEST_CASE("beta density values") {
  for (double y : {1e-6, 0.1, 0.5, 0.93}) CHECK(std::abs(beta_log_density(y, 0.5, 2.0)) < 1e-14);
  const double mu = 0.4, phi = 5.0, y = 0.3;
  const double ref = -oracle::log_beta50(mu * phi, (1 - mu) * phi) + (mu * phi - 1) * std::log(y) +
                     ((1 - mu) * phi - 1) * std::log(1 - y);
  CHECK(std::abs(beta_log_density(y, mu, phi) - ref) < 1e-12 * std::abs(ref));
}

TEST_CASE("beta density integrates to one") {
  const oracle::BetaDensity d(0.3, 7.0);
  const double total = oracle::integrate01(
      [&](double y, double ym) { return std::exp(d.log_f(y, ym)); },
      d.mean(), d.sd());
  CHECK(std::abs(total - 1.0) < 1e-10);
}

TEST_CASE("mean and variance of the parameterization") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> um(0.05, 0.95), up(0.5, 200.0);
  for (int k = 0; k < 20; ++k) {
    const double mu = um(rng), phi = up(rng);
    const oracle::BetaDensity d(mu, phi);
    auto moment = [&](int r) {
      return oracle::integrate01(
          [&](double y, double ym) { return std::pow(y - mu, r) * std::exp(d.log_f(y, ym)); }, d.mean(),
          d.sd());
    };
    CHECK(std::abs(moment(1)) < 1e-8);
    CHECK(std::abs(moment(2) - mu * (1 - mu) / (1 + phi)) < 1e-8);
  }
}

TEST_CASE("mean_vector") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0.5, 1, 0.2, 1, 0.9;
  const Link logit;
  const Eigen::VectorXd mu0 = mean_vector(x, logit, Eigen::Vector2d::Zero());
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(mu0[i] == 0.5);
  const Eigen::VectorXd mu = mean_vector(x, logit, Eigen::Vector2d(-1.0, 1.0));
  CHECK(std::abs(mu[0] - 1.0 / (1.0 + std::exp(0.5))) < 1e-15);
  CHECK(std::abs(mu[0] - 0.37754) < 1e-5);
  CHECK_THROWS_AS(mean_vector(x, logit, Eigen::Vector2d(INFINITY, 0.0)), NonFinitePredictorError);
}

TEST_CASE("transform_response") {
  const std::vector<double> raw{0.0, 3.0};
  const std::vector<double> y = transform_response(raw, 0.0, 3.0, true);
  CHECK(std::abs(y[0] - 0.25) < 1e-15);
  CHECK(std::abs(y[1] - 0.75) < 1e-15);

  const std::vector<double> inner{0.1, 0.5, 0.999};
  CHECK(transform_response(inner, 0.0, 1.0, false) == inner);
  CHECK_THROWS_AS(transform_response(raw, 0.0, 3.0, false), DomainError);

  // 799 scores on [0, 3].
  std::vector<double> haq(799);
  for (std::size_t i = 0; i < haq.size(); ++i) haq[i] = 3.0 * static_cast<double>(i % 13) / 12.0;
  const std::vector<double> t = transform_response(haq, 0.0, 3.0, true);
  for (std::size_t i = 0; i < haq.size(); ++i) {
    CHECK(std::abs(t[i] - ((haq[i] / 3) * 798 + 0.5) / 799) < 1e-15);
  }
}

TEST_CASE("link round trip and derivative") {
  for (auto kind : {Link::Kind::logit, Link::Kind::probit, Link::Kind::cloglog, Link::Kind::log}) {
    const Link g(kind);
    CAPTURE(g.name());
    for (double lm = -6.0; lm <= 6.0; lm += 0.01) {
      // Covers (1e-6, 1 - 1e-6) densely at both ends.
      const double mu = 1.0 / (1.0 + std::pow(10.0, -lm));
      if (!(mu > 1e-6 && mu < 1 - 1e-6)) continue;
      REQUIRE(std::abs(g.inverse(g.fun(mu)) - mu) <= 1e-10);
      const double h = 1e-4 * std::min(mu, 1 - mu);
      const double fd = (g.fun(mu + h) - g.fun(mu - h)) / (2 * h);
      REQUIRE(std::abs(fd - g.deriv(mu)) <= 1e-6 * std::abs(g.deriv(mu)));
    }
  }
  const Link logit;
  for (double mu : {0.01, 0.3, 0.77}) CHECK(std::abs(logit.deriv(mu) - 1 / (mu * (1 - mu))) < 1e-12 / (mu * (1 - mu)));
}

TEST_CASE("link parsing") {
  CHECK(Link::parse("probit").kind() == Link::Kind::probit);
  CHECK(Link::parse("cloglog").name() == "cloglog");
  CHECK_THROWS_AS(Link::parse("cauchit"), ParseError);
  CHECK(PrecisionLink::parse("sqrt").kind() == PrecisionLink::Kind::sqrt);
  CHECK_THROWS_AS(PrecisionLink::parse("inverse"), ParseError);
}

TEST_CASE("dataset validation") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 1, 1, 2, 1, 3;
  CHECK_THROWS_AS(Dataset(Eigen::Vector3d(0.2, 1.0, 0.5), x), DomainError);
  CHECK_THROWS_AS(Dataset(Eigen::Vector3d(0.2, 0.3, 0.5), Eigen::MatrixXd::Ones(3, 2)), ModelError);
  const Dataset d(Eigen::Vector3d(0.2, 0.3, 0.5), x);
  CHECK(std::abs(d.logit_y()[0] - std::log(0.25)) < 1e-15);
  CHECK(std::abs(d.log1m_y()[2] - std::log(0.5)) < 1e-15);
  const std::vector<Eigen::Index> drop{1};
  const Dataset e = d.without_rows(drop);
  CHECK(e.n() == 2);
  CHECK(e.y()[1] == 0.5);
}

TEST_CASE("ParamVector coordinates") {
  const ParamVector t(Eigen::Vector2d(-1, 1), 5.0);
  CHECK(std::abs(t.phi() - 5.0) < 1e-14);
  CHECK(std::abs(t.sigma2() - 1.0 / 6.0) < 1e-15);
  const ParamVector u = ParamVector::from_unconstrained(t.unconstrained());
  CHECK((u.natural() - t.natural()).norm() < 1e-14);
  CHECK_THROWS_AS(ParamVector(Eigen::Vector2d(0, 0), -1.0), DomainError);
}
