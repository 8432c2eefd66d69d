#pragma once

#include <stdexcept>
#include <string>

namespace rigfit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numeric argument is outside its admissible range (K > N, tau <= 0, ...).
class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// Input data has the wrong shape or is otherwise unusable.
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// Frames of a sequence, or a rig and a mesh, disagree on topology.
class TopologyMismatch : public Error {
public:
  using Error::Error;
};

/// Malformed file content; the message carries line/field context.
class ParseError : public Error {
public:
  using Error::Error;
};

/// A file parsed but violates a data invariant (weights not summing to 1, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

}  // namespace rigfit
