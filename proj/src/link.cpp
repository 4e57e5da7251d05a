#include "betadpd/link.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "betadpd/error.hpp"

namespace betadpd {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

Link Link::parse(std::string_view name) {
  if (name == "logit") return Link(Kind::logit);
  if (name == "probit") return Link(Kind::probit);
  if (name == "cloglog") return Link(Kind::cloglog);
  if (name == "log") return Link(Kind::log);
  throw ParseError("unknown mean link '" + std::string(name) +
                   "' (expected logit, probit, cloglog or log)");
}

std::string Link::name() const {
  switch (kind_) {
    case Kind::logit: return "logit";
    case Kind::probit: return "probit";
    case Kind::cloglog: return "cloglog";
    case Kind::log: return "log";
  }
  return "?";
}

double Link::fun(double mu) const {
  switch (kind_) {
    case Kind::logit: return std::log(mu) - std::log1p(-mu);
    case Kind::probit: return normal_quantile(mu);
    case Kind::cloglog: return std::log(-std::log1p(-mu));
    case Kind::log: return std::log(mu);
  }
  return NAN;
}

double Link::inverse(double eta) const {
  switch (kind_) {
    case Kind::logit:
      // Split on the sign so that neither branch overflows.
      if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
      return std::exp(eta) / (1.0 + std::exp(eta));
    case Kind::probit: return normal_cdf(eta);
    case Kind::cloglog: return -std::expm1(-std::exp(eta));
    case Kind::log: return std::exp(eta);
  }
  return NAN;
}

double Link::deriv(double mu) const {
  switch (kind_) {
    case Kind::logit: return 1.0 / (mu * (1.0 - mu));
    case Kind::probit: return 1.0 / normal_pdf(normal_quantile(mu));
    case Kind::cloglog: {
      const double l = std::log1p(-mu);
      return -1.0 / ((1.0 - mu) * l);
    }
    case Kind::log: return 1.0 / mu;
  }
  return NAN;
}

PrecisionLink PrecisionLink::parse(std::string_view name) {
  if (name == "log") return PrecisionLink(Kind::log);
  if (name == "sqrt") return PrecisionLink(Kind::sqrt);
  if (name == "identity") return PrecisionLink(Kind::identity);
  throw ParseError("unknown precision link '" + std::string(name) +
                   "' (expected log, sqrt or identity)");
}

std::string PrecisionLink::name() const {
  switch (kind_) {
    case Kind::log: return "log";
    case Kind::sqrt: return "sqrt";
    case Kind::identity: return "identity";
  }
  return "?";
}

double PrecisionLink::fun(double phi) const {
  switch (kind_) {
    case Kind::log: return std::log(phi);
    case Kind::sqrt: return std::sqrt(phi);
    case Kind::identity: return phi;
  }
  return NAN;
}

double PrecisionLink::inverse(double eta) const {
  double phi = NAN;
  switch (kind_) {
    case Kind::log: phi = std::exp(eta); break;
    case Kind::sqrt: phi = eta > 0.0 ? eta * eta : 0.0; break;
    case Kind::identity: phi = eta; break;
  }
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw NonFinitePredictorError("precision predictor " + std::to_string(eta) +
                                  " maps outside (0, inf) under the " + name() + " link");
  }
  return phi;
}

double PrecisionLink::deriv(double phi) const {
  switch (kind_) {
    case Kind::log: return 1.0 / phi;
    case Kind::sqrt: return 0.5 / std::sqrt(phi);
    case Kind::identity: return 1.0;
  }
  return NAN;
}

}  // namespace betadpd
