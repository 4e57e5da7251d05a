#pragma once

#include <string>
#include <string_view>

namespace betadpd {

/// Mean link g: (0,1) -> R.
class Link {
 public:
  enum class Kind { logit, probit, cloglog, log };

  constexpr Link() = default;
  constexpr explicit Link(Kind kind) : kind_(kind) {}

  /// Parses "logit", "probit", "cloglog" or "log"; throws ParseError otherwise.
  static Link parse(std::string_view name);

  Kind kind() const { return kind_; }
  std::string name() const;

  double fun(double mu) const;
  double inverse(double eta) const;
  /// g'(mu) = 1 / (d mu / d eta).
  double deriv(double mu) const;

  friend bool operator==(const Link&, const Link&) = default;

 private:
  Kind kind_ = Kind::logit;
};

/// Precision link h: (0,inf) -> R for the variable-dispersion model.
class PrecisionLink {
 public:
  enum class Kind { log, sqrt, identity };

  constexpr PrecisionLink() = default;
  constexpr explicit PrecisionLink(Kind kind) : kind_(kind) {}

  static PrecisionLink parse(std::string_view name);

  Kind kind() const { return kind_; }
  std::string name() const;

  double fun(double phi) const;
  /// Throws NonFinitePredictorError when eta maps outside (0, inf).
  double inverse(double eta) const;
  /// h'(phi).
  double deriv(double phi) const;

  friend bool operator==(const PrecisionLink&, const PrecisionLink&) = default;

 private:
  Kind kind_ = Kind::log;
};

}  // namespace betadpd
