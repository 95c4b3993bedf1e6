#pragma once

#include <stdexcept>
#include <string>

namespace rpg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class BadDimensions : public Error {
 public:
  using Error::Error;
};

/// Raised when an SVD-based check is asked to work on a spectrum whose
/// distinct singular values are closer than the configured gap.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

/// A gradient or metric field returned NaN/Inf.
class NonFiniteField : public Error {
 public:
  using Error::Error;
};

class LayoutMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyBuffer : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpg
