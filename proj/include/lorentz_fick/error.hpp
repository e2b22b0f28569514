#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lorentz_fick {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A potential profile violates the support / monotonicity requirements.
class InvalidPotential : public Error {
 public:
  using Error::Error;
};

/// The adaptive integrator could not meet its energy tolerance.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, double x1, double x2)
      : Error(what + " at (" + std::to_string(x1) + ", " + std::to_string(x2) + ")"),
        x1_(x1),
        x2_(x2) {}

  double x1() const { return x1_; }
  double x2() const { return x2_; }

 private:
  double x1_;
  double x2_;
};

/// An iterative solve stopped before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Experiment configuration failed validation; the message carries the field path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace lorentz_fick
