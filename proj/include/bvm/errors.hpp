#pragma once

#include <stdexcept>
#include <string>

namespace bvm {

// Argument outside the stated domain of a closed-form bound.
struct InvalidInput : std::invalid_argument {
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A matrix required to be non-singular is singular to working precision.
struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

// A required factorization failed or a matrix that must be SPD is not.
struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// An iterative solver exhausted its iteration budget.
struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

// Newton step unavailable: the negated Hessian lost positive definiteness.
struct SingularHessian : std::runtime_error {
  explicit SingularHessian(const std::string& what) : std::runtime_error(what) {}
};

// A design matrix that must have full column rank does not.
struct RankDeficient : std::runtime_error {
  explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

// A grouped count Z_j = 0 makes log(Z_j/M_n) undefined.
struct ZeroCount : std::runtime_error {
  explicit ZeroCount(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature box fails the boundary mass check.
struct BoxTooSmall : std::runtime_error {
  explicit BoxTooSmall(const std::string& what) : std::runtime_error(what) {}
};

// Log-density evaluated to NaN or -inf where a finite value is required.
struct NonFiniteDensity : std::runtime_error {
  explicit NonFiniteDensity(const std::string& what) : std::runtime_error(what) {}
};

// No admissible value exists under the stated constraints.
struct Infeasible : std::runtime_error {
  explicit Infeasible(const std::string& what) : std::runtime_error(what) {}
};

// Invalid or incomplete run configuration; names the offending field.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_name(field) {}
  std::string field_name;
};

}  // namespace bvm
