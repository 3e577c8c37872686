#pragma once

#include <stdexcept>
#include <string>

namespace thetabound {

/// Malformed input: a channel, composition, conditional type or code that
/// violates its invariants. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
  public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numeric routine could not produce a result (no admissible handle,
/// non-PSD power matrix, optimizer failure). Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Enumeration would exceed the combinatorial guard.
class GuardExceeded : public std::runtime_error {
  public:
    GuardExceeded(const std::string& what, double count) : std::runtime_error(what), count_(count) {}
    double count() const noexcept { return count_; }

  private:
    double count_;
};

}  // namespace thetabound
