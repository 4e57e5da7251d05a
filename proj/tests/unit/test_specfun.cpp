#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "betadpd/error.hpp"
#include "betadpd/specfun.hpp"
#include "oracles/mp_specfun.hpp"

using namespace betadpd;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST_CASE("log_beta closed values") {
  CHECK(std::abs(specfun::log_beta(1.0, 1.0)) < 1e-15);
  CHECK(std::abs(specfun::log_beta(2.0, 3.0) - std::log(1.0 / 12.0)) < 1e-14);
  CHECK(rel(specfun::log_beta(4.7, 12.3), oracle::log_beta50(4.7, 12.3)) < 1e-12);
}

TEST_CASE("log_beta against 50-digit reference over wide arguments") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lg(-3.0, 6.0);
  for (int k = 0; k < 2000; ++k) {
    const double a = std::pow(10.0, lg(rng)), b = std::pow(10.0, lg(rng));
    const double ref = oracle::log_beta50(a, b);
    const double got = specfun::log_beta(a, b);
    // Relative error against ln B, except near its zero where absolute error is the meaningful one.
    CHECK(std::abs(got - ref) <= 2e-13 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("log_beta symmetry is exact") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lg(-2.0, 6.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = std::pow(10.0, lg(rng)), b = std::pow(10.0, lg(rng));
    CHECK(specfun::log_beta(a, b) == specfun::log_beta(b, a));
  }
}

TEST_CASE("log_beta stays finite at large precision") {
  CHECK(std::isfinite(specfun::log_beta(0.3 * 1e6, 0.7 * 1e6)));
  CHECK(rel(specfun::log_beta(0.3 * 1e6, 0.7 * 1e6), oracle::log_beta50(0.3e6, 0.7e6)) < 1e-12);
}

TEST_CASE("digamma values") {
  CHECK(std::abs(specfun::digamma(1.0) + 0.57721566490153286) < 1e-14);
  CHECK(std::abs(specfun::digamma(0.5) - (-std::numbers::egamma - 2 * std::numbers::ln2)) < 1e-14);
  CHECK(rel(specfun::digamma(7.31), static_cast<double>(oracle::digamma50(7.31))) < 1e-12);
}

TEST_CASE("trigamma values") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(specfun::trigamma(1.0) - pi2 / 6) < 1e-13);
  CHECK(std::abs(specfun::trigamma(0.5) - pi2 / 2) < 1e-13);
  CHECK(rel(specfun::trigamma(3.2), static_cast<double>(oracle::trigamma50(3.2))) < 1e-10);
}

TEST_CASE("digamma and trigamma against 50-digit reference") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lg(-3.0, 6.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = std::pow(10.0, lg(rng));
    const double d = static_cast<double>(oracle::digamma50(x));
    CHECK(std::abs(specfun::digamma(x) - d) <= 1e-13 * std::max(1.0, std::abs(d)));
    CHECK(rel(specfun::trigamma(x), static_cast<double>(oracle::trigamma50(x))) < 1e-12);
  }
}

TEST_CASE("digamma recurrence on random points") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int k = 0; k < 10000; ++k) {
    const double x = u(rng);
    const double lhs = specfun::digamma(x + 1) - specfun::digamma(x);
    REQUIRE(std::abs(lhs - 1.0 / x) <= 1e-12 * std::max(1.0, 1.0 / x));
  }
}

TEST_CASE("trigamma matches central difference of digamma") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  const double h = 1e-5;
  for (int k = 0; k < 10000; ++k) {
    const double x = u(rng);
    if (x <= h) continue;
    const double fd = (specfun::digamma(x + h) - specfun::digamma(x - h)) / (2 * h);
    // The difference quotient itself carries O(h^2 psi''') error, large near 0.01.
    const double trunc = h * h / 6 * 2.0 / (x * x * x) * 3.0 / x;
    REQUIRE(std::abs(fd - specfun::trigamma(x)) <= 1e-5 + trunc);
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(specfun::log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(specfun::log_beta(-1.0, 2.0), DomainError);
  CHECK_THROWS_AS(specfun::digamma(std::nan("")), DomainError);
  CHECK_THROWS_AS(specfun::trigamma(-0.5), DomainError);
  CHECK_THROWS_AS(specfun::digamma(INFINITY), DomainError);
}
