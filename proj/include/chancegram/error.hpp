#pragma once

#include <stdexcept>
#include <string>

namespace chancegram {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class MeasureError : public Error {
 public:
  using Error::Error;
};

class PermuteError : public Error {
 public:
  using Error::Error;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class MtcError : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

/// Malformed intermediate file (bad row, bad header).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace chancegram
