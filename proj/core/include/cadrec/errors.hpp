#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cadrec {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A continuous value lies outside the quantization range of its parameter.
class ValueRangeError : public Error {
 public:
  using Error::Error;
};

// Malformed token stream; token_index points at the offending position
// (== stream size when the stream ends prematurely).
class ParseError : public Error {
 public:
  ParseError(std::size_t token_index_, const std::string& what_)
      : Error(what_ + " (token index " + std::to_string(token_index_) + ")"),
        token_index(token_index_) {}
  std::size_t token_index;
};

// Degenerate curve geometry (collinear arc points, inconsistent circle points).
class DegenerateCurveError : public Error {
 public:
  using Error::Error;
};

// A solid whose execution occupies no space.
class EmptySolidError : public Error {
 public:
  using Error::Error;
};

// Surface sampling could not collect the requested point count.
class UndersampleError : public Error {
 public:
  UndersampleError(int collected_, int requested_)
      : Error("surface sampling collected " + std::to_string(collected_) + " of " +
              std::to_string(requested_) + " points"),
        collected(collected_),
        requested(requested_) {}
  int collected;
  int requested;
};

// Too few points near the prompt plane to extract a profile.
class InsufficientSupportError : public Error {
 public:
  using Error::Error;
};

// Profile component too small to fit loops against.
class DegenerateProfileError : public Error {
 public:
  using Error::Error;
};

// Extruded extent below the minimum thickness.
class FlatCandidateError : public Error {
 public:
  using Error::Error;
};

// Candidate step cannot be combined with the current state.
class InvalidCandidateError : public Error {
 public:
  using Error::Error;
};

// Selection invoked with no candidates.
class NoCandidateError : public Error {
 public:
  using Error::Error;
};

// Bounding box with zero volume where a proper box is required.
class DegenerateBoxError : public Error {
 public:
  using Error::Error;
};

// Degenerate input to normalization / metrics (empty or zero-extent).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Reconstruction pipeline never executed a single step.
class InvalidReconstructionError : public Error {
 public:
  InvalidReconstructionError(const std::string& what_, std::string trace_json_)
      : Error(what_), trace_json(std::move(trace_json_)) {}
  std::string trace_json;
};

// Bad user-supplied file or argument.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace cadrec
