#pragma once

#include <stdexcept>
#include <string>

namespace eqdisc {

// Error taxonomy. The CLI maps each family onto a stable exit code:
// ConfigError -> 1, SimulationError -> 2, NumericError -> 3.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input files or run configs (missing columns, bad sections).
struct SchemaError : ConfigError {
  using ConfigError::ConfigError;
};

// Unparseable cell content; carries the offending file line in the message.
struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};

// Grid problems: non-monotone or duplicated coordinates, non-uniform
// spacing where a method requires uniform steps, incomplete grids.
struct GeometryError : ConfigError {
  using ConfigError::ConfigError;
};

// An operation was called in a state it does not support (e.g. denormalizing
// without recorded norms).
struct StateError : ConfigError {
  using ConfigError::ConfigError;
};

struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Explicit-scheme stability violation (c = b*dt/dx^2 > 1/2).
struct StabilityError : SimulationError {
  using SimulationError::SimulationError;
};

// Integrator produced a non-finite state.
struct DivergenceError : SimulationError {
  using SimulationError::SimulationError;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A non-constant library column is identically zero.
struct DegenerateColumnError : NumericError {
  using NumericError::NumericError;
};

// Pairwise fitness had no usable sample points.
struct UndefinedFitnessError : NumericError {
  using NumericError::NumericError;
};

}  // namespace eqdisc
