#pragma once

#include <stdexcept>
#include <string>

namespace betadpd {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// The model is not usable as specified (rank deficiency, bad dimensions, bad link name).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Linear predictor overflowed to a non-finite value.
class NonFinitePredictorError : public ModelError {
 public:
  explicit NonFinitePredictorError(const std::string& what) : ModelError(what) {}
};

/// An integral of f^{1+alpha} diverges: a = (1+alpha)mu*phi - alpha or
/// b = (1+alpha)(1-mu)phi - alpha is not positive.
class DivergentIntegralError : public ModelError {
 public:
  explicit DivergentIntegralError(const std::string& what) : ModelError(what) {}
};

/// A matrix that must be inverted is singular or not positive definite.
class SingularMatrixError : public ModelError {
 public:
  explicit SingularMatrixError(const std::string& what) : ModelError(what) {}
};

/// Malformed input file or command-line option.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace betadpd
