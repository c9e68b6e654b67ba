#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace biothom {

/// Invalid or inconsistent input data. `field()` names the offending entry
/// (dotted path for configuration files, empty when not attributable).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear solver breakdown or non-convergence.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& message, int iterations, double residual)
      : std::runtime_error(message + " (iterations=" + std::to_string(iterations) +
                           ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace biothom
