#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nphase {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid user input (tension matrices, phase maps, run configuration).
struct InvalidInput : Error {
  using Error::Error;
};

// Config file / override parsing problems.
struct ConfigError : Error {
  using Error::Error;
};

// Linear solver failed to reach its tolerance.
struct SolveError : Error {
  SolveError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

// Newton iteration failed to converge.
struct NewtonError : Error {
  NewtonError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

}  // namespace nphase
