#pragma once

#include <stdexcept>
#include <string>

namespace infodeleg {

// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative numerics (quadrature, simplex) that did not reach tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A root-finding bracket without a sign change. `boundary` is the value of the
// solved function at the bracket end that should have carried the other sign.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double boundary)
      : std::runtime_error(what), boundary_(boundary) {}
  double boundary_value() const noexcept { return boundary_; }

 private:
  double boundary_;
};

// Invalid distribution / objective / run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The informativeness condition g(mu) mu > G(mu) fails.
class AssumptionError : public std::runtime_error {
 public:
  AssumptionError(const std::string& what, double margin)
      : std::runtime_error(what), margin_(margin) {}
  double margin() const noexcept { return margin_; }

 private:
  double margin_;
};

// A price function that fails continuity, convexity or domination of G.
class CertificateError : public std::runtime_error {
 public:
  CertificateError(const std::string& what, double violation)
      : std::runtime_error(what + " (violation " + std::to_string(violation) + ")"),
        violation_(violation) {}
  double violation() const noexcept { return violation_; }

 private:
  double violation_;
};

}  // namespace infodeleg
