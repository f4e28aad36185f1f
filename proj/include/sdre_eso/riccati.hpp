#pragma once

/// @file
/// Continuous algebraic Riccati and Lyapunov equations for the small dense
/// systems used by the SDRE controller, plus the Lyapunov-based stability
/// and definiteness certificates.

#include <cstddef>
#include <optional>
#include <vector>

#include "sdre_eso/dims.hpp"
#include "sdre_eso/matops.hpp"

namespace sdre_eso::riccati {

using matops::Matrix;
using matops::Vector;

/// A^T P + P A - P B R^{-1} B^T P + Q = 0 with Q, R symmetric positive
/// definite.
struct CareProblem {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
};

struct CareSolution {
  Matrix P;
  /// R^{-1} B^T P.
  Matrix K;
  /// Frobenius norm of the Riccati residual at P.
  double residual_norm = 0.0;
  std::size_t iterations = 0;
  /// ||P_{j+1} - P_j||_F for each Newton step.
  std::vector<double> step_norms;
  /// trace(P_j) for every iterate, starting with the seed's Lyapunov solution.
  std::vector<double> traces;
};

/// Throws DimensionError / ConfigError if shapes are inconsistent or Q, R
/// are not symmetric positive definite.
void validate(const CareProblem& prob);

/// Kleinman-Newton iteration.  When K0 is given and stabilizing it seeds the
/// iteration; otherwise (or if K0 turns out not to be stabilizing) the
/// companion-form bootstrap gain is used, which requires A to have the
/// block-companion shape [[0, I], [F]] and B = [[0], [G]].
///
/// Throws NotStabilizableError when no stabilizing seed exists and
/// ConvergenceError when an iterate is not positive definite or the final
/// residual exceeds 1e-8 times the magnitude of the Riccati terms
/// (||Q|| + 2||A|| ||P|| + ||P||^2 ||B R^{-1} B^T||, floored at 1).
CareSolution solve_care(const CareProblem& prob, const std::optional<Matrix>& K0 = std::nullopt);

/// Riccati residual A^T P + P A - P B R^{-1} B^T P + Q.
Matrix care_residual(const CareProblem& prob, const Matrix& P);

/// K0 = G^{-1} (F + Lambda), where Lambda puts every channel of the closed
/// loop [[0, I], [F - G K0]] at the characteristic polynomial (s + 1)^k.
/// F is n x kn, G is n x n.  Throws SingularError if G is singular.
Matrix bootstrap_stabilizing_gain(const SystemDims& dims, const Matrix& F, const Matrix& G);

/// Reads F and G out of a companion pair (A, B) and calls the overload above.
/// Throws NotStabilizableError if (A, B) does not have companion structure.
Matrix bootstrap_stabilizing_gain(const Matrix& A, const Matrix& B, const SystemDims& dims);

/// Solves A^T P + P A + Q = 0 through the Kronecker-sum system
/// (I (x) A^T + A^T (x) I) vec(P) = -vec(Q).  The result is symmetrized.
/// Throws SingularError if A and -A share an eigenvalue.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// True iff A^T P + P A + I = 0 has a unique, positive definite solution.
bool is_hurwitz(const Matrix& A);

/// Cholesky of the symmetric part; true iff every pivot exceeds
/// 1e-12 * norm_inf(P).
bool is_positive_definite(const Matrix& P);

/// Chain-integrator pair of a (k, n) system: A0 = [[0, I], [0]], B0 = [[0], [I]].
Matrix chain_integrator_A(const SystemDims& dims);
Matrix chain_integrator_B(const SystemDims& dims);

}  // namespace sdre_eso::riccati
