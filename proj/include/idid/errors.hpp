#pragma once

#include <stdexcept>
#include <string>

namespace idid {

enum class ErrorKind {
  // input / validation
  MissingColumn,
  NonBinaryValue,
  NonFiniteValue,
  MissingCell,
  NegativeSE,
  DimensionMismatch,
  InvalidArgument,
  // estimation
  EmptyCell,
  CellTooSmall,
  DegenerateTrend,
  RankDeficient,
  Separation,
  NotConverged,
  DeltaDNearZero,
  WeakFirstStage,
  ZeroSE,
  TooManyDegenerateResamples,
};

const char* error_kind_name(ErrorKind kind);

/// Base for all library errors; carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  const char* kind_name() const { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

/// Malformed or inconsistent input (CLI exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input was well-formed but estimation cannot proceed (CLI exit code 2).
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace idid
