#pragma once

#include <stdexcept>
#include <string>

namespace affect {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated API precondition (bad shapes, out-of-range labels, unfrozen model
// where a frozen one is required).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed annotation or config text. Message carries file and line.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what) {}
  explicit ParseError(const std::string& what) : Error(what) {}
};

// Bad pipeline configuration. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing or unusable input data. CLI exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

// Unreadable or incompatible checkpoint. CLI exit code 4.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace affect
