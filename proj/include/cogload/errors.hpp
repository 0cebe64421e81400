#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cogload {

// Base class for every error this library raises deliberately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument violated its documented domain (non-finite input, bad range).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Inputs that must agree with each other do not (missing parameter for an
// observed response, duplicate matrix entry, map/ratings mismatch).
class InconsistentInputError : public Error {
 public:
  using Error::Error;
};

// Malformed content in an input file. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// The same (learner, item, timestamp) triple appeared twice in a log file.
class DuplicateEventError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Degeneracy removal left nothing to calibrate.
class EmptyAfterReductionError : public Error {
 public:
  using Error::Error;
};

// A calibration iterate became non-finite. Carries the sweep index.
class NumericalFailureError : public Error {
 public:
  NumericalFailureError(const std::string& message, int iteration)
      : Error(message + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// A segment has no item with a known difficulty.
class UndefinedDifficultyError : public Error {
 public:
  UndefinedDifficultyError(const std::string& learner_id, int administration_index)
      : Error("segment has no mapped items (learner " + learner_id +
              ", administration " + std::to_string(administration_index) + ")"),
        learner_id_(learner_id),
        administration_index_(administration_index) {}

  const std::string& learner_id() const { return learner_id_; }
  int administration_index() const { return administration_index_; }

 private:
  std::string learner_id_;
  int administration_index_;
};

// The simulated item bank ran out before the session finished.
class BankExhaustedError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure. Carries the offending path.
class IoError : public Error {
 public:
  IoError(const std::string& message, const std::string& path)
      : Error(message + ": " + path), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace cogload
