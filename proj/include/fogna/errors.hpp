#pragma once

#include <stdexcept>
#include <string>

namespace fogna {

/// Invalid construction or command parameters (bad sensor counts, arity mismatch, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// An operation was called outside its documented precondition.
class PreconditionError : public std::logic_error {
 public:
  explicit PreconditionError(const std::string& what) : std::logic_error(what) {}
};

/// A numerical stage could not produce a usable result (too few snapshots, empty input).
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

/// An internal consistency check failed; indicates a bug, not bad input.
class InvariantViolation : public std::logic_error {
 public:
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace fogna
