#pragma once

/// @file
/// Extended state observer for x_k^(k) = f(x) + G(x) u with output y = x_1.
/// Besides the stacked state it estimates the total disturbance
/// x_{k+1} = xdot_k - G_hat(x) u.

#include <functional>
#include <variant>
#include <vector>

#include "sdre_eso/dims.hpp"
#include "sdre_eso/matops.hpp"

namespace sdre_eso::eso {

using matops::Matrix;
using matops::Vector;

/// Estimated input matrix, evaluated on a kn state vector.
using InputMatrixFn = std::function<Matrix(const Vector&)>;

/// e_i(v) = c_i v / eps^i for i = 1..k+1.
struct LinearHighGain {
  double epsilon = 0.01;
  /// k+1 coefficients; for k = 2 the usual choice is (3, 3, 1).
  std::vector<double> coefficients;
};

/// Arbitrary injection functions e_1..e_{k+1}, each R^n -> R^n.
struct CustomGain {
  std::vector<std::function<Vector(const Vector&)>> injections;
};

using GainKind = std::variant<LinearHighGain, CustomGain>;

struct EsoConfig {
  SystemDims dims;
  GainKind gain;
  InputMatrixFn g_hat;
  /// Evaluate G_hat on the state with its first block replaced by the
  /// measurement y instead of on the estimate.
  bool g_hat_from_measurement = false;
};

/// Coefficients of (s + 1)^{k+1} without the leading term, i.e. the
/// binomial row that places every observer pole at -1/eps.
std::vector<double> default_coefficients(std::size_t k);

/// Throws ConfigError if the configuration is inconsistent.
void validate(const EsoConfig& cfg);

struct EsoState {
  Vector xhat;      ///< kn
  Vector xhat_ext;  ///< n

  friend bool operator==(const EsoState&, const EsoState&) = default;
};

/// Time derivative of the observer state:
///   d xhat_i     = xhat_{i+1} + e_i(y - xhat_1),               i < k
///   d xhat_k     = xhat_ext + e_k(y - xhat_1) + G_hat(.) u
///   d xhat_ext   = e_{k+1}(y - xhat_1)
/// Throws EvaluationError on non-finite inputs or outputs.
EsoState eso_derivative(const EsoState& state, const Vector& y, const Vector& u,
                        const EsoConfig& cfg);

/// Throws DimensionError if the lengths do not match dims.
EsoState initialize(const Vector& x0_guess, const Vector& ext_guess, const SystemDims& dims);

}  // namespace sdre_eso::eso
