#pragma once

#include <stdexcept>
#include <string>

namespace hotspot {

// Bad caller input (negative radius, malformed window, mismatched grids, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input file is missing a required column or is structurally unusable.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model fitting cannot proceed (empty history, zero pilot density, ...).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Density evaluation was asked for something undefined.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The Gibbs sampler hit a non-finite state.
class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ForecastError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stored artifact does not match its recorded hash, or is missing.
class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested artifact id is not in the store.
class NotFoundError : public StoreError {
 public:
  using StoreError::StoreError;
};

}  // namespace hotspot
