#pragma once

#include <stdexcept>
#include <string>

namespace tmlab {

// Invalid input: bad parameters, malformed specs, violated preconditions.
class SpecError : public std::invalid_argument {
public:
  explicit SpecError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure: overflow after stabilization, solver divergence,
// bracket exhaustion.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Deflation scan found no scale at which consecutive deflated iterates
// stabilize.
class NoScaleError : public NumericError {
public:
  explicit NoScaleError(const std::string& what) : NumericError(what) {}
};

}  // namespace tmlab
