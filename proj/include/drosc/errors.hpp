#pragma once

#include <stdexcept>
#include <string>

namespace drosc {

// I/O and parsing failures (CLI exit code 1).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Empty uncertainty polytope after tuning escalation (CLI exit code 2).
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Degenerate inference: every perturbation filtered out or infeasible (CLI exit code 3).
class InferenceError : public std::runtime_error {
 public:
  explicit InferenceError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown (factorization failure, pivot breakdown, iteration caps).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace drosc
