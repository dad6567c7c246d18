#pragma once

#include <stdexcept>
#include <string>

namespace afnet {

/// Base of every error the library raises. Callers that only need a message
/// can catch this; tests match on the concrete subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents disagree (channel counts, broadcast axes, N/H/W).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Spatial geometry leaves no valid output (kernel larger than input, tile
/// larger than padded raster, margin too wide).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but carries no information to work with (empty
/// tensors, zero std, every pixel ignored).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an API precondition (non-scalar loss, missing aux input).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// backward() on a tensor that is not attached to any graph.
class MissingGraphError : public Error {
 public:
  using Error::Error;
};

/// Values out of range (labels >= K, bad config values).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content; message carries the byte offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed but unsupported file content (e.g. PPM maxval != 255).
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf was produced while finite-check debug mode is on.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

}  // namespace afnet
