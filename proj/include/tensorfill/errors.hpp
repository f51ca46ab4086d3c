#pragma once

#include <stdexcept>
#include <string>

namespace tensorfill {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimensions of an input do not fit the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input data violates the documented domain (bad reliability code, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A numerical routine failed or produced non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// All-zero singular spectrum; carries no rank information.
class DegenerateSpectrumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The input holds no valid observation at all (empty patch / empty series).
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// A parameter is outside its documented range or a request cannot be met.
class ParamError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// File contents disagree with their header (size mismatch, bad byte, ...).
class CorruptionError : public IoError {
 public:
  using IoError::IoError;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Preconditions whose violation is a programming error, not a data error.
inline void contract(bool condition, const char* what) {
  if (!condition) {
    throw std::logic_error(std::string("contract violation: ") + what);
  }
}

}  // namespace tensorfill
