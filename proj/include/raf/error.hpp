#pragma once

#include <stdexcept>
#include <string>

namespace raf {

/// Base of every error raised by the library. The CLI maps the subclasses
/// onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: landmark files, configs, manifests, degenerate geometry.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Filesystem and image-codec failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient or singular linear systems.
class NumericError : public Error {
 public:
  using Error::Error;
};

class BudgetExhausted : public Error {
 public:
  BudgetExhausted() : Error("query budget exhausted") {}
};

/// A remote oracle call that did not produce a response. The query still counts.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace raf
