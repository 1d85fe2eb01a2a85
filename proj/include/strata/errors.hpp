#pragma once

#include <stdexcept>
#include <string>

namespace strata {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector lengths or layouts that do not match the declared knot count.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Bad argument values (non-positive counts, inverted bounds, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A design whose derived geometry cannot be realized.
class InfeasibleGeometry : public Error {
 public:
  InfeasibleGeometry(const std::string& what, double offending_value)
      : Error(what), value_(offending_value) {}

  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Design outside its box bounds.
class OutOfBounds : public Error {
 public:
  using Error::Error;
};

/// Objective state that violates its invariants (e.g. missing area threshold).
class StateError : public Error {
 public:
  using Error::Error;
};

/// The evaluator could not produce a response.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace strata
