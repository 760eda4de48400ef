#pragma once

#include <stdexcept>
#include <string>

namespace dgpsim {

// Base for every error raised by the library. Subclasses map one-to-one onto
// the failure modes callers are expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParam : public Error {
 public:
  using Error::Error;
};

class NotInvertible : public Error {
 public:
  using Error::Error;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class UnstablePlant : public Error {
 public:
  using Error::Error;
};

class DegenerateInputPath : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class DomainViolation : public Error {
 public:
  using Error::Error;
};

class OracleRequired : public Error {
 public:
  using Error::Error;
};

// Runtime failures. Both carry the tick at which the simulation stopped.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long tick) : Error(what), tick_(tick) {}
  long tick() const noexcept { return tick_; }

 private:
  long tick_;
};

class SimulationDiverged : public DivergenceError {
 public:
  using DivergenceError::DivergenceError;
};

class EstimatorDiverged : public DivergenceError {
 public:
  using DivergenceError::DivergenceError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DualNeedsStrictConvexity : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace dgpsim
