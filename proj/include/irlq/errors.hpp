#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irlq {

/// Malformed or inadmissible input: bad dimensions, non-finite data,
/// asymmetric or indefinite weights, times outside the horizon.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure of an integrator or factorization.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix ODE produced non-finite values.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(std::size_t node, double time, const std::string& what)
      : NumericalError(what + " diverged at node " + std::to_string(node) +
                       " (t = " + std::to_string(time) + ")"),
        node_(node),
        time_(time) {}

  std::size_t node() const { return node_; }
  double time() const { return time_; }

 private:
  std::size_t node_;
  double time_;
};

/// A matrix that must be inverted is numerically singular.
class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// rank(R(t)) changes over the horizon; the reduced input dimension would vary.
class UnsupportedRankVariation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An operation was called on a problem of the wrong class (e.g. regular
/// synthesis on an irregular problem).
class MisuseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace irlq
