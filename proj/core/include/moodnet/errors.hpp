#pragma once

#include <stdexcept>

namespace moodnet {

/// Shape or rank of a tensor argument does not satisfy an operation's contract.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value (depth, pool size, dropout rate, config file key).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read, written, or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid runtime input (bad label, empty signal, missing modality).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training cannot continue (non-finite gradients or loss).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An API was called in the wrong order (e.g. backward without a train-mode forward).
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace moodnet
