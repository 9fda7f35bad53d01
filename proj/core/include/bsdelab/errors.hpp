#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bsdelab {

/// Argument outside the mathematical domain of an operation
/// (negative x for psi, mu <= 0, time outside the horizon, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The integrability weight mu fails mu > b * sqrt(remaining horizon).
/// The exponential-moment bound blows up at the critical point, so every
/// consumer of that bound refuses to run instead of returning inf/NaN.
class SubcriticalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested allocation exceeds the configured ensemble memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An adapted kernel exceeded its declared bound. For Girsanov kernels this
/// signals a false Lipschitz-in-z declaration on the generator.
class BoundViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares failure (rank collapse or non-finite solve) at a given node.
class RegressionError : public std::runtime_error {
 public:
  RegressionError(const std::string& what, std::size_t node)
      : std::runtime_error(what + " [node " + std::to_string(node) + "]"),
        node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment inputs violate the hypotheses of the statement being probed
/// (ordering of terminals, generator class, declared-constant checks, ...).
class HypothesisViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pricing requested without an ADMISSIBLE integrability report.
class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bsdelab
