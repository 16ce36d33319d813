#pragma once

#include <stdexcept>
#include <string>

namespace eki {

// Precondition violated by the caller (bad sizes, negative times, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// analyze() asked for more coefficients than the grid can resolve.
class IllConditionedProjection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ensemble left the finite range during an update.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Boundary value problem has no unique solution on the requested grid.
class WellPosednessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every sampled pair of the Lipschitz probe hit the pull-back guard.
class ProbeUndefined : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dense solve reported failure.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace eki
