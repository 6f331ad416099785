#pragma once

#include <stdexcept>
#include <string>

namespace aqmsim {

// Invalid numeric parameter passed to a model function.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Scenario/config problem; carries the offending key when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Singular or otherwise unsolvable stochastic model.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// State space larger than the exact solvers accept.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double max_residual)
      : std::runtime_error(what), max_residual_(max_residual) {}
  double max_residual() const noexcept { return max_residual_; }

 private:
  double max_residual_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double max_residual)
      : std::runtime_error(what), iterations_(iterations), max_residual_(max_residual) {}
  int iterations() const noexcept { return iterations_; }
  double max_residual() const noexcept { return max_residual_; }

 private:
  int iterations_;
  double max_residual_;
};

}  // namespace aqmsim
