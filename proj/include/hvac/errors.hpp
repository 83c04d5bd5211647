#pragma once

#include <stdexcept>
#include <string>

namespace hvac {

// Bad input: schema violations, broken invariants, length mismatches.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string &what) : std::invalid_argument(what) {}
};

// Solver failures: infeasible constraint sets, iteration caps.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace hvac
