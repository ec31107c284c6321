#pragma once

#include <stdexcept>
#include <string>

namespace cllb {

// Each error family maps onto one CLI exit code.
enum class ErrorKind { usage = 1, validation = 2, numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid parameters, out-of-domain arguments, malformed grids.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// Factorization failures, PSD violations, quadrature non-convergence, empty Monte Carlo curves.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

}  // namespace cllb
