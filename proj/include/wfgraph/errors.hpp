#pragma once

#include <stdexcept>
#include <string>

namespace wfg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed input: ragged or non-square matrices, negative rates, bad sizes.
class StructuralError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "structural"; }
};

/// A modeling assumption is violated (mutation graph i/ii/iii, antisymmetry).
class AssumptionError : public Error {
 public:
  AssumptionError(std::string assumption, const std::string& what)
      : Error(what), assumption_(std::move(assumption)) {}
  const std::string& assumption() const noexcept { return assumption_; }
  const char* kind() const noexcept override { return "assumption"; }

 private:
  std::string assumption_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// Quadrature or solver failed to reach the requested accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

/// Operation requested on a measure of the wrong kind (exact vs large-N).
class UnsupportedModeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported_mode"; }
};

/// Preconditions of an analytic statement are not met, so it is refused.
class RefusedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "refused"; }
};

}  // namespace wfg
