#pragma once

#include <stdexcept>
#include <string>

namespace graphsamp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad argument values that violate a documented precondition.
struct InvalidArgument : Error {
  using Error::Error;
};

struct EmptyGraph : Error {
  using Error::Error;
};

struct IsolatedNode : Error {
  using Error::Error;
};

struct SelfLoop : Error {
  using Error::Error;
};

struct DuplicateEdge : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(const std::string& what, long line_no)
      : Error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  long line = 0;
};

// Generator could not produce a connected graph within the retry budget.
struct GenerationFailed : Error {
  using Error::Error;
};

// Dense-path routine asked to operate above its dimension cap.
struct DimensionCap : Error {
  using Error::Error;
};

struct MissingBasis : Error {
  using Error::Error;
};

struct InvalidCutoff : Error {
  using Error::Error;
};

// Lanczos recurrence collapsed (invariant subspace hit) beyond retry budget.
struct Breakdown : Error {
  using Error::Error;
};

struct NotConverged : Error {
  using Error::Error;
};

struct BudgetExceedsN : Error {
  using Error::Error;
};

struct NotQualified : Error {
  using Error::Error;
};

struct MissingGamma : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct DeltaOutOfRange : Error {
  using Error::Error;
};

}  // namespace graphsamp
