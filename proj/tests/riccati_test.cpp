#include "sdre_eso/riccati.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "sdre_eso/checks.hpp"
#include "sdre_eso/errors.hpp"

namespace sdre_eso::riccati {
namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) EXPECT_NEAR(a(i, j), b(i, j), tol) << i << "," << j;
}

CareProblem chain_problem(std::size_t k) {
  const SystemDims dims{k, 1};
  return {chain_integrator_A(dims), chain_integrator_B(dims), Matrix::identity(k), Matrix{{1.0}}};
}

TEST(SolveCare, DoubleIntegratorClosedForm) {
  // -p2^2 + 1 = 0, p1 - p2 p3 = 0, 2 p2 - p3^2 + 1 = 0.
  const auto sol = solve_care(chain_problem(2));
  expect_near(sol.P, Matrix{{kSqrt3, 1.0}, {1.0, kSqrt3}}, 1e-8);
  expect_near(sol.K, Matrix{{1.0, kSqrt3}}, 1e-8);
  EXPECT_LE(sol.residual_norm, 1e-10);
}

TEST(SolveCare, TripleIntegratorClosedForm) {
  const double s = 1.0 + kSqrt2;
  const auto sol = solve_care(chain_problem(3));
  expect_near(sol.P, Matrix{{s, s, 1.0}, {s, 2.0 * s, s}, {1.0, s, s}}, 1e-8);
  expect_near(sol.K, Matrix{{1.0, s, s}}, 1e-8);
}

TEST(SolveCare, ScalarIntegrator) {
  const auto sol = solve_care({Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}});
  EXPECT_NEAR(sol.P(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(sol.K(0, 0), 1.0, 1e-12);
}

TEST(SolveCare, PendulumLinearization) {
  const CareProblem prob{Matrix{{0.0, 1.0}, {3.924, -10.0}}, Matrix{{0.0}, {0.4}},
                         Matrix::identity(2), Matrix{{1.0}}};
  const auto sol = solve_care(prob);
  EXPECT_LE(sol.residual_norm, 1e-8);
  EXPECT_LE(norm_fro(sol.P - sol.P.transpose()), 1e-10 * norm_fro(sol.P));
  EXPECT_TRUE(is_positive_definite(sol.P));
  // Reference values from an independent Schur-based solver.
  expect_near(sol.P,
              Matrix{{510.64287068753424, 49.177091696243565},
                     {49.177091696243565, 4.784572126179451}},
              1e-8 * 510.0);
}

TEST(SolveCare, StabilizingWarmStartReachesSameSolution) {
  const auto cold = solve_care(chain_problem(2));
  const auto warm = solve_care(chain_problem(2), Matrix{{2.0, 3.0}});
  expect_near(warm.P, cold.P, 1e-10);
}

TEST(SolveCare, DestabilizingWarmStartFallsBackToBootstrap) {
  const auto sol = solve_care(chain_problem(2), Matrix{{-1.0, 0.0}});
  expect_near(sol.P, Matrix{{kSqrt3, 1.0}, {1.0, kSqrt3}}, 1e-8);
}

TEST(SolveCare, RejectsIndefiniteWeights) {
  CareProblem prob = chain_problem(2);
  prob.Q = Matrix{{1.0, 2.0}, {2.0, 1.0}};
  EXPECT_THROW(solve_care(prob), ConfigError);
  prob = chain_problem(2);
  prob.R = Matrix{{-1.0}};
  EXPECT_THROW(solve_care(prob), ConfigError);
  prob = chain_problem(2);
  prob.B = Matrix(3, 1);
  EXPECT_THROW(solve_care(prob), DimensionError);
}

TEST(SolveCare, NonCompanionUnstablePairIsNotStabilizable) {
  const CareProblem prob{Matrix{{1.0, 0.0}, {0.0, 1.0}}, Matrix{{1.0}, {0.0}}, Matrix::identity(2),
                         Matrix{{1.0}}};
  EXPECT_THROW(solve_care(prob), NotStabilizableError);
}

TEST(BootstrapGain, Examples) {
  EXPECT_EQ(bootstrap_stabilizing_gain(SystemDims{2, 1}, Matrix{{0.0, 0.0}}, Matrix{{1.0}}),
            (Matrix{{1.0, 2.0}}));
  EXPECT_EQ(bootstrap_stabilizing_gain(SystemDims{1, 1}, Matrix{{5.0}}, Matrix{{1.0}}),
            (Matrix{{6.0}}));

  const Matrix K0 =
      bootstrap_stabilizing_gain(SystemDims{2, 1}, Matrix{{3.924, -10.0}}, Matrix{{0.4}});
  expect_near(K0, Matrix{{12.31, -20.0}}, 1e-12);
  const Matrix A{{0.0, 1.0}, {3.924, -10.0}};
  EXPECT_TRUE(is_hurwitz(A - Matrix{{0.0}, {0.4}} * K0));
}

TEST(BootstrapGain, SingularInputMatrix) {
  EXPECT_THROW(bootstrap_stabilizing_gain(SystemDims{2, 1}, Matrix{{1.0, 1.0}}, Matrix{{0.0}}),
               SingularError);
}

TEST(SolveLyapunov, ScalarExamples) {
  EXPECT_NEAR(solve_lyapunov(Matrix{{-1.0}}, Matrix{{1.0}})(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(solve_lyapunov(Matrix{{-2.0}}, Matrix{{1.0}})(0, 0), 0.25, 1e-15);
}

TEST(SolveLyapunov, TwoByTwoAgainstHandSolution) {
  // With P = [[a, b], [b, c]]: -2b + 1 = 0, a - b - c = 0, 2b - 2c + 1 = 0.
  const Matrix A{{0.0, 1.0}, {-1.0, -1.0}};
  const Matrix P = solve_lyapunov(A, Matrix::identity(2));
  expect_near(P, Matrix{{1.5, 0.5}, {0.5, 1.0}}, 1e-12);
  EXPECT_LE(norm_fro(A.transpose() * P + P * A + Matrix::identity(2)), 1e-10 * (1.0 + kSqrt2));
  EXPECT_TRUE(is_positive_definite(P));
}

TEST(SolveLyapunov, SingularWhenAandMinusAShareEigenvalue) {
  EXPECT_THROW(solve_lyapunov(chain_integrator_A({2, 1}), Matrix::identity(2)), SingularError);
}

TEST(IsHurwitz, Examples) {
  EXPECT_TRUE(is_hurwitz(Matrix{{-2.0}}));
  EXPECT_FALSE(is_hurwitz(Matrix{{1.0}}));
  EXPECT_FALSE(is_hurwitz(chain_integrator_A({2, 1})));
  EXPECT_TRUE(is_hurwitz(Matrix{{0.0, 1.0}, {-1.0, -kSqrt3}}));
}

TEST(IsPositiveDefinite, Examples) {
  EXPECT_TRUE(is_positive_definite(Matrix::identity(3)));
  EXPECT_FALSE(is_positive_definite(Matrix{{1.0, 2.0}, {2.0, 1.0}}));
  EXPECT_TRUE(is_positive_definite(Matrix{{kSqrt3, 1.0}, {1.0, kSqrt3}}));
  EXPECT_FALSE(is_positive_definite(Matrix(2, 2)));
}

TEST(RiccatiProperty, RandomCompanionProblems) {
  checks::Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = checks::random_companion_problem(rng);
    const auto sol = solve_care(p.care);
    EXPECT_LE(sol.residual_norm, 1e-8) << "trial " << trial;
    EXPECT_LE(norm_fro(sol.P - sol.P.transpose()), 1e-10 * norm_fro(sol.P));
    EXPECT_TRUE(is_positive_definite(sol.P)) << "trial " << trial;
    EXPECT_TRUE(is_hurwitz(p.care.A - p.care.B * sol.K)) << "trial " << trial;
    expect_near(sol.K, solve_linear(p.care.R, p.care.B.transpose()) * sol.P,
                1e-12 * std::max(1.0, norm_fro(sol.K)));
  }
}

// Newton iterates decrease in the Loewner order after the first step, so
// their traces are non-increasing.  The step norms need not be: seed 77,
// trial 75 has steps 418, 420, 986, 2347 before converging.
TEST(RiccatiProperty, KleinmanIteratesDecrease) {
  checks::Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = checks::random_companion_problem(rng);
    const auto sol = solve_care(p.care);
    ASSERT_EQ(sol.traces.size(), sol.step_norms.size() + 1);
    for (std::size_t j = 1; j < sol.traces.size(); ++j) {
      EXPECT_LE(sol.traces[j], sol.traces[j - 1] + 1e-10 * std::abs(sol.traces[j - 1]))
          << "trial " << trial << " iterate " << j;
    }
  }
}

TEST(RiccatiProperty, LyapunovResidual) {
  checks::Rng rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    Matrix A(n, n);
    Matrix M(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        A(i, j) = u(rng);
        M(i, j) = u(rng);
      }
    A = A - (static_cast<double>(n) + 0.5) * Matrix::identity(n);
    const Matrix Q = M.transpose() * M + Matrix::identity(n);
    const Matrix P = solve_lyapunov(A, Q);
    EXPECT_LE(norm_fro(A.transpose() * P + P * A + Q), 1e-10 * (1.0 + norm_fro(Q)));
  }
}

}  // namespace
}  // namespace sdre_eso::riccati
