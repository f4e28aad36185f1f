#include "sdre_eso/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdre_eso/errors.hpp"

namespace sdre_eso::riccati {

namespace {

constexpr std::size_t kMaxIterations = 100;
constexpr double kStepTolerance = 1e-11;
constexpr double kResidualTolerance = 1e-8;
constexpr double kPivotFactor = 1e-12;
constexpr double kSymmetryTolerance = 1e-10;

bool is_symmetric(const Matrix& m) {
  if (!m.is_square()) return false;
  const double scale = std::max(1.0, norm_inf(m));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTolerance * scale) return false;
  return true;
}

double binomial(std::size_t k, std::size_t j) {
  double c = 1.0;
  for (std::size_t i = 1; i <= j; ++i) c = c * static_cast<double>(k - j + i) / static_cast<double>(i);
  return c;
}

// True when A = [[0, I], [F]] and B = [[0], [G]] for the given dims.
bool has_companion_structure(const Matrix& A, const Matrix& B, const SystemDims& dims) {
  const std::size_t N = dims.state_dim();
  const std::size_t top = N - dims.n;
  if (A.rows() != N || A.cols() != N || B.rows() != N || B.cols() != dims.n) return false;
  for (std::size_t i = 0; i < top; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      if (A(i, j) != (j == i + dims.n ? 1.0 : 0.0)) return false;
    }
    for (std::size_t j = 0; j < dims.n; ++j) {
      if (B(i, j) != 0.0) return false;
    }
  }
  return true;
}

SystemDims infer_dims(const CareProblem& prob) {
  const std::size_t N = prob.A.rows();
  const std::size_t n = prob.B.cols();
  if (n == 0 || N % n != 0) return {1, N};
  return {N / n, n};
}

}  // namespace

void validate(const CareProblem& prob) {
  const std::size_t N = prob.A.rows();
  const std::size_t m = prob.B.cols();
  if (!prob.A.is_square() || prob.B.rows() != N || prob.Q.rows() != N || prob.Q.cols() != N ||
      prob.R.rows() != m || prob.R.cols() != m) {
    throw DimensionError("CareProblem: inconsistent shapes");
  }
  if (!is_symmetric(prob.Q) || !is_positive_definite(prob.Q)) {
    throw ConfigError("CareProblem: Q must be symmetric positive definite");
  }
  if (!is_symmetric(prob.R) || !is_positive_definite(prob.R)) {
    throw ConfigError("CareProblem: R must be symmetric positive definite");
  }
}

Matrix care_residual(const CareProblem& prob, const Matrix& P) {
  const Matrix S = prob.B * matops::solve_linear(prob.R, prob.B.transpose());
  return prob.A.transpose() * P + P * prob.A - P * S * P + prob.Q;
}

CareSolution solve_care(const CareProblem& prob, const std::optional<Matrix>& K0) {
  validate(prob);
  const Matrix Rinv_BT = matops::solve_linear(prob.R, prob.B.transpose());

  CareSolution sol;
  Matrix K;
  bool seeded = false;

  // One Lyapunov solve of the Kleinman recursion.  Returns false if the
  // current gain is not stabilizing.
  auto lyapunov_step = [&](const Matrix& gain, Matrix& P) {
    const Matrix closed = prob.A - prob.B * gain;
    try {
      P = solve_lyapunov(closed, prob.Q + gain.transpose() * prob.R * gain);
    } catch (const SingularError&) {
      return false;
    }
    return is_positive_definite(P);
  };

  Matrix P;
  if (K0) {
    if (K0->rows() != prob.B.cols() || K0->cols() != prob.A.rows()) {
      throw DimensionError("solve_care: initial gain has the wrong shape");
    }
    seeded = lyapunov_step(*K0, P);
    if (seeded) K = *K0;
  }
  if (!seeded) {
    K = bootstrap_stabilizing_gain(prob.A, prob.B, infer_dims(prob));
    if (!lyapunov_step(K, P)) {
      throw NotStabilizableError("solve_care: bootstrap gain is not stabilizing");
    }
  }

  auto trace = [](const Matrix& m) {
    double t = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
  };
  sol.traces.push_back(trace(P));
  sol.iterations = 1;
  bool converged = false;
  while (sol.iterations < kMaxIterations) {
    K = Rinv_BT * P;
    Matrix next;
    if (!lyapunov_step(K, next)) {
      throw ConvergenceError("solve_care: Newton iterate " + std::to_string(sol.iterations) +
                             " lost positive definiteness");
    }
    ++sol.iterations;
    const double step = norm_fro(next - P);
    sol.step_norms.push_back(step);
    sol.traces.push_back(trace(next));
    const double scale = norm_fro(P);
    P = std::move(next);
    if (step <= kStepTolerance * scale) {
      converged = true;
      break;
    }
  }

  sol.P = P;
  sol.K = Rinv_BT * P;
  sol.residual_norm = norm_fro(care_residual(prob, P));
  if (!converged && !(sol.residual_norm <= kResidualTolerance * std::max(1.0, norm_fro(P)))) {
    throw ConvergenceError("solve_care: no convergence after " + std::to_string(kMaxIterations) +
                           " iterations");
  }
  // Relative to the size of the individual Riccati terms, which grow like
  // ||P||^2 for strongly unstable SDC matrices.
  const Matrix S = prob.B * Rinv_BT;
  const double term_scale = norm_fro(prob.Q) + 2.0 * norm_fro(prob.A) * norm_fro(P) +
                            norm_fro(P) * norm_fro(P) * norm_fro(S);
  if (!(sol.residual_norm <= kResidualTolerance * std::max(1.0, term_scale))) {
    throw ConvergenceError("solve_care: residual " + std::to_string(sol.residual_norm) +
                           " above tolerance");
  }
  return sol;
}

Matrix bootstrap_stabilizing_gain(const SystemDims& dims, const Matrix& F, const Matrix& G) {
  const std::size_t N = dims.state_dim();
  if (F.rows() != dims.n || F.cols() != N || G.rows() != dims.n || G.cols() != dims.n) {
    throw DimensionError("bootstrap_stabilizing_gain: F must be n x kn and G n x n");
  }
  Matrix target = F;
  for (std::size_t block = 0; block < dims.k; ++block) {
    const double c = binomial(dims.k, block);
    for (std::size_t i = 0; i < dims.n; ++i) target(i, block * dims.n + i) += c;
  }
  return matops::solve_linear(G, target);
}

Matrix bootstrap_stabilizing_gain(const Matrix& A, const Matrix& B, const SystemDims& dims) {
  if (!has_companion_structure(A, B, dims)) {
    if (A.is_square() && is_hurwitz(A)) return Matrix(B.cols(), A.rows());
    throw NotStabilizableError(
        "bootstrap_stabilizing_gain: (A, B) is not in block-companion form and A is not Hurwitz");
  }
  const std::size_t top = dims.state_dim() - dims.n;
  try {
    return bootstrap_stabilizing_gain(dims, A.block(top, 0, dims.n, dims.state_dim()),
                                      B.block(top, 0, dims.n, dims.n));
  } catch (const SingularError& e) {
    throw NotStabilizableError(std::string("bootstrap_stabilizing_gain: ") + e.what());
  }
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  if (!A.is_square() || Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw DimensionError("solve_lyapunov: A and Q must be square of equal size");
  }
  const std::size_t n = A.rows();
  const Matrix At = A.transpose();
  const Matrix I = Matrix::identity(n);
  const Matrix sum = kronecker(I, At) + kronecker(At, I);

  Matrix P = Matrix::unvec(matops::solve_linear(sum, -Q.vec()), n, n);
  // One step of iterative refinement keeps the residual near roundoff for
  // poorly scaled A.
  const Matrix residual = At * P + P * A + Q;
  if (norm_fro(residual) > 1e-13 * (1.0 + norm_fro(Q))) {
    P = P + Matrix::unvec(matops::solve_linear(sum, -residual.vec()), n, n);
  }
  return symmetrize(P);
}

bool is_hurwitz(const Matrix& A) {
  if (!A.is_square()) throw DimensionError("is_hurwitz: matrix must be square");
  try {
    return is_positive_definite(solve_lyapunov(A, Matrix::identity(A.rows())));
  } catch (const SingularError&) {
    return false;
  }
}

bool is_positive_definite(const Matrix& P) {
  if (!P.is_square()) throw DimensionError("is_positive_definite: matrix must be square");
  const Matrix S = symmetrize(P);
  const std::size_t n = S.rows();
  const double threshold = kPivotFactor * norm_inf(S);
  if (n == 0 || !(norm_inf(S) > 0.0)) return false;
  Matrix L(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = S(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= L(j, p) * L(j, p);
    if (!(d > threshold)) return false;
    L(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = S(i, j);
      for (std::size_t p = 0; p < j; ++p) v -= L(i, p) * L(j, p);
      L(i, j) = v / L(j, j);
    }
  }
  return true;
}

Matrix chain_integrator_A(const SystemDims& dims) {
  const std::size_t N = dims.state_dim();
  Matrix A(N, N);
  for (std::size_t i = 0; i + dims.n < N; ++i) A(i, i + dims.n) = 1.0;
  return A;
}

Matrix chain_integrator_B(const SystemDims& dims) {
  Matrix B(dims.state_dim(), dims.n);
  B.set_block(dims.state_dim() - dims.n, 0, Matrix::identity(dims.n));
  return B;
}

}  // namespace sdre_eso::riccati
