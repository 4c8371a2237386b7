#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nngs {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed token stream in the expression grammar.
class SyntaxError : public Error {
 public:
  using Error::Error;
};

// An expression with zero or several focus markers, or a focus directly under a focus.
class FocusCountError : public Error {
 public:
  using Error::Error;
};

class InfeasibleRange : public Error {
 public:
  using Error::Error;
};

// A rewrite path step that does not apply to the running expression.
class StepFailed : public Error {
 public:
  StepFailed(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class Unreachable : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public FormatError {
 public:
  using FormatError::FormatError;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace nngs
