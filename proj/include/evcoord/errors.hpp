#pragma once

#include <stdexcept>
#include <string>

namespace evcoord {

// Error taxonomy; the CLI maps these onto exit codes
// (config/model/contract -> 1, numerical -> 2, infeasibility -> 3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed network data: duplicate lines, disconnected graph, bad bases.
struct ModelError : Error {
  using Error::Error;
};

// Bad run configuration or input file; message carries file:line where known.
struct ConfigError : Error {
  using Error::Error;
};

// A caller violated a documented precondition.
struct ContractError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& msg, double residual = 0.0)
      : Error(msg), last_residual(residual) {}
  double last_residual;
};

struct InfeasibilityError : Error {
  explicit InfeasibilityError(const std::string& msg, int vehicle = -1)
      : Error(msg), vehicle_id(vehicle) {}
  int vehicle_id;
};

}  // namespace evcoord
