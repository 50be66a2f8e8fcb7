#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wqbm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid physical parameters or operation preconditions.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested within the exclusion window of a zero of G+.
class CausticError : public Error {
 public:
  CausticError(const std::string& what, std::vector<double> times)
      : Error(what), times_(std::move(times)) {}
  explicit CausticError(const std::string& what) : Error(what) {}

  /// Offending times, when known.
  const std::vector<double>& times() const noexcept { return times_; }

 private:
  std::vector<double> times_;
};

/// A Matsubara series did not reach its tail tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature stalled above its tolerance.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Two poles of a residue expansion coincide.
class PoleDegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Pointwise value of the strict-Ohmic friction kernel, which is a delta.
class StrictOhmicDeltaError : public Error {
 public:
  using Error::Error;
};

class DegenerateCovarianceError : public Error {
 public:
  using Error::Error;
};

class GridMismatchError : public Error {
 public:
  using Error::Error;
};

class FitWindowError : public Error {
 public:
  using Error::Error;
};

/// The propagating-function width is not resolved by the phase-space grid.
class UnderresolvedKernelError : public Error {
 public:
  using Error::Error;
};

class DiagonalizationError : public Error {
 public:
  using Error::Error;
};

}  // namespace wqbm
