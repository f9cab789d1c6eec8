#pragma once

#include <stdexcept>
#include <string>

namespace arrayloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the operation's domain (bad dimensions, non-finite values, N too small).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but violates a stated precondition (e.g. an incomplete EDM passed to MDS).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The adjacency structure cannot be completed (no robust-quadrilateral ordering exists).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class LinkUnavailable : public Error {
 public:
  using Error::Error;
};

/// Peak sits on the first or last correlation lag, so no three-point fit is possible.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace arrayloc
