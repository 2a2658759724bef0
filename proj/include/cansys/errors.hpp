#pragma once

#include <stdexcept>
#include <string>

namespace cansys {

// Precondition or domain violations: bad parameters, points outside the
// domain of definition, data that fails the positivity constraints.
class domain_error : public std::invalid_argument {
 public:
  explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical breakdown at runtime: poles, overflow, series that refuse to
// converge, step-size underflow in the integrator.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Data sets too small or too narrow for the requested estimate.
class insufficient_data : public std::runtime_error {
 public:
  explicit insufficient_data(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cansys
