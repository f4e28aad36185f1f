#pragma once

/// @file
/// Estimated state-dependent coefficient (SDC) matrices built from observer
/// outputs.  Every construction returns an n x kn matrix F_hat with
/// F_hat * xhat == xhat_ext, so that the unknown drift can be written in the
/// linear-looking form needed by the pointwise Riccati controller.

#include <cstddef>
#include <variant>
#include <vector>

#include "sdre_eso/dims.hpp"
#include "sdre_eso/matops.hpp"

namespace sdre_eso::sdc {

using matops::Matrix;
using matops::Vector;

/// Observer output at time t: stacked state estimate (kn) and extended
/// state (n).
struct Estimate {
  Vector xhat;
  Vector xhat_ext;
  double t = 0.0;
};

/// Throws DimensionError if the estimate does not match dims.
void validate(const Estimate& est, const SystemDims& dims);

/// Smooth exponential-weight construction, valid for n >= 2.
struct ContinuousVariant {
  double varpi = 1.0;
  /// One nonzero scale per channel; empty means all ones.
  Vector varrho;
  /// Optional custom index sets J1(i) (0-based, one per channel).  Empty
  /// selects J1(i) = {i, i+n, ..., i+(k-1)n}.
  std::vector<std::vector<std::size_t>> j1;

  friend bool operator==(const ContinuousVariant&, const ContinuousVariant&) = default;
};

/// Closed-form second-order scalar construction (k = 2, n = 1).
struct ContinuousScalarVariant {
  friend bool operator==(const ContinuousScalarVariant&, const ContinuousScalarVariant&) = default;
};

/// Switching construction around the smallest-magnitude coordinate; finite
/// everywhere, including on coordinate hyperplanes.
struct DiscontinuousVariant {
  /// One nonzero scale per channel; empty means all ones.
  Vector rho;
  /// Positive raw weights, n x kn; empty means uniform.  They are rescaled
  /// per row at evaluation so that the SDC identity holds (see
  /// build_F_discontinuous).
  Matrix weights;

  friend bool operator==(const DiscontinuousVariant&, const DiscontinuousVariant&) = default;
};

using SdcVariant = std::variant<ContinuousVariant, ContinuousScalarVariant, DiscontinuousVariant>;

/// Throws VariantError when the variant cannot be used with dims, and
/// ConfigError for bad parameters (zero scales, non-positive weights,
/// index sets that do not partition {0..kn-1}).
void validate(const SdcVariant& variant, const SystemDims& dims);

/// Estimates with a coordinate below this magnitude are treated as singular
/// by the continuous constructions.
inline constexpr double kSingularCoordinate = 1e-9;

/// J1(i) for channel i (0-based).  J2(i) is its complement.
std::vector<std::size_t> index_set(std::size_t channel, const SystemDims& dims,
                                   const ContinuousVariant& variant);

/// p_i(xhat) = exp(-varpi * prod_{j not in J1}|xhat_j| / prod_{j in J1}|xhat_j|).
double exponential_weight(std::size_t channel, const Vector& xhat, const SystemDims& dims,
                          const ContinuousVariant& variant);

/// W(i,j) = varrho_i p_i / |J1| on J1 and (1 - varrho_i p_i) / |J2| on J2.
/// Throws SingularStateError on a zero coordinate and VariantError if n < 2.
Matrix build_W_continuous(const Estimate& est, const SystemDims& dims,
                          const ContinuousVariant& variant);

/// W (.) (xhat_ext (/) xhat).
Matrix build_F_continuous(const Estimate& est, const SystemDims& dims,
                          const ContinuousVariant& variant);

/// xhat_3 * [exp(-xhat_2/xhat_1)/xhat_1, (1 - exp(-xhat_2/xhat_1))/xhat_2].
/// Throws SingularStateError if xhat_1 or xhat_2 is zero or the result
/// overflows.
Matrix build_F_continuous_scalar(const Estimate& est);

struct DiscontinuousSdc {
  Matrix F_hat;
  /// argmin_l |xhat_l| (lowest index on ties).
  std::size_t j_star = 0;
  /// More than one coordinate attains the minimum magnitude.
  bool tie = false;
};

/// Column j* of F_hat is rho_i * xhat_ext_i (the xhat_j*/xhat_j* factor is
/// cancelled analytically).  Every other column is
/// (1 - rho_i xhat_j*) / w_i(j) * xhat_ext_i / xhat_j with the effective
/// weights scaled so that sum_{j != j*} 1 / w_i(j) = 1.  With uniform raw
/// weights and kn = 2 this gives w = 1.  Entries whose denominator is an
/// exact zero (only possible on a tie at zero) are set to 0.
DiscontinuousSdc build_F_discontinuous(const Estimate& est, const SystemDims& dims,
                                       const DiscontinuousVariant& variant);

struct SdcEvaluation {
  Matrix F_hat;
  bool tie = false;
  /// A continuous variant hit its singular set and the discontinuous
  /// construction was used instead.
  bool fell_back = false;
};

/// Dispatches on the variant.  Continuous variants reject estimates with a
/// coordinate below kSingularCoordinate (or an overflowing result) with
/// SingularStateError, unless fallback_to_discontinuous is set, in which
/// case the discontinuous construction with unit parameters is returned.
SdcEvaluation build_F(const Estimate& est, const SystemDims& dims, const SdcVariant& variant,
                      bool fallback_to_discontinuous = false);

struct SdcFactorization {
  Matrix A_hat;  ///< [[0, I], [F_hat]], kn x kn
  Matrix B_hat;  ///< [[0], [G_hat]], kn x n
  Matrix F_hat;
  Matrix G_hat;
  /// G_hat is rank deficient; such a pair is never controllable.
  bool input_singular = false;
};

SdcFactorization assemble(const Matrix& F_hat, const Matrix& G_hat, const SystemDims& dims);

/// [B, A B, ..., A^{kn-1} B].
Matrix kalman_matrix(const SdcFactorization& fact);

/// rank(kalman_matrix(fact)) == kn.
bool controllability_check(const SdcFactorization& fact,
                           double tol = matops::kDefaultRankTolerance);

}  // namespace sdre_eso::sdc
