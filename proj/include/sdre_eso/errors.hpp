#pragma once

#include <stdexcept>
#include <string>

namespace sdre_eso {

/// Base class for every error raised by this library.  The CLI maps the
/// concrete subclasses onto process exit codes (see tools/sdre_eso_cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A linear system or matrix inverse is numerically singular.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// A user-supplied function returned a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// The estimate lies on the singular set of a state-dependent coefficient
/// construction (zero coordinate, overflow of the exponential weight).
class SingularStateError : public Error {
 public:
  using Error::Error;
};

/// The requested SDC variant cannot be used with the given dimensions.
class VariantError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed (Riccati iteration, non-PD intermediate).
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// No stabilizing initial gain could be produced for the Riccati solve.
class NotStabilizableError : public Error {
 public:
  using Error::Error;
};

/// The offline closed-loop Jacobian / ROA pipeline produced a matrix that is
/// not Hurwitz or a Lyapunov matrix that is not positive definite.
class AlgorithmFailure : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or scenario file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdre_eso
