#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bahadur_lab {

// Root of every error the library throws. Each subclass names one failure
// class so callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument outside the operation's domain (p outside (0,1), n = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The sample has zero spread, so studentization is undefined.
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

// The null CDF saturated at 0 or 1 on an observation, so a log-weighted
// statistic is infinite.
class DegenerateTail : public Error {
 public:
  using Error::Error;
};

// The family has no finite mean or variance (Cauchy).
class UndefinedMoments : public Error {
 public:
  using Error::Error;
};

// The request is well formed but outside what an implementation supports.
class Unsupported : public Error {
 public:
  using Error::Error;
};

// Quadrature, root finding or an optimizer failed to meet its tolerance.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

// No candidate satisfies the constraints (empty feasible set or a dual
// that diverges).
class Infeasible : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or input file. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class MissingKey : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class BadValue : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bahadur_lab
