#pragma once

#include <stdexcept>
#include <string>

namespace soebm {

// Error categories. The CLI maps each to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument to a math routine (bad sigma, empty vector, shape mismatch).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Solver non-convergence, divergence, non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Non-finite gradients or parameters during training.
class TrainingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace soebm
