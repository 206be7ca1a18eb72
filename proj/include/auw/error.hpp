#pragma once

#include <stdexcept>
#include <string>

namespace auw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf where a finite value is required, or an undefined quantity.
class NumericError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

/// FMAT / CSV file errors. The kind distinguishes the failure modes.
class IoError : public Error {
 public:
  enum class Kind { kOpen, kBadMagic, kVersionMismatch, kTruncated, kNonFinite, kParse };

  IoError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Violation of the master/worker protocol (unknown worker, infeasible
/// result, M update before K results arrived, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Dataset generation failed (e.g. angle floor unreachable).
class DataGenError : public Error {
 public:
  using Error::Error;
};

}  // namespace auw
