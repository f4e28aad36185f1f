#include "sdre_eso/sdc.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "sdre_eso/checks.hpp"
#include "sdre_eso/errors.hpp"

namespace sdre_eso::sdc {
namespace {

const double kE = std::exp(1.0);

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) EXPECT_NEAR(a(i, j), b(i, j), tol) << i << "," << j;
}

TEST(ContinuousW, UnitEstimate) {
  const SystemDims dims{1, 2};
  const Matrix W = build_W_continuous({Vector{1.0, 1.0}, Vector{1.0, 1.0}}, dims, {});
  expect_near(W, Matrix{{1.0 / kE, 1.0 - 1.0 / kE}, {1.0 - 1.0 / kE, 1.0 / kE}}, 1e-15);
}

TEST(ContinuousW, RowsSumToOneWithUnitScales) {
  checks::Rng rng(3);
  for (const SystemDims dims : {SystemDims{1, 2}, SystemDims{2, 2}, SystemDims{3, 2}, SystemDims{1, 3}}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Estimate est = checks::random_estimate(rng, dims);
      const Matrix W = build_W_continuous(est, dims, {});
      for (std::size_t i = 0; i < dims.n; ++i) {
        // |J1| entries of rho p / |J1| plus |J2| entries of (1 - rho p) / |J2|.
        double row = 0.0;
        for (std::size_t j = 0; j < dims.state_dim(); ++j) row += W(i, j);
        EXPECT_NEAR(row, 1.0, 1e-14);
      }
    }
  }
}

TEST(ContinuousW, ZeroCoordinateIsSingular) {
  const SystemDims dims{1, 2};
  EXPECT_THROW(build_W_continuous({Vector{0.0, 1.0}, Vector{1.0, 1.0}}, dims, {}),
               SingularStateError);
  EXPECT_THROW(build_F({Vector{0.0, 1.0}, Vector{1.0, 1.0}}, dims, ContinuousVariant{}),
               SingularStateError);
}

TEST(ContinuousW, RequiresTwoChannels) {
  EXPECT_THROW(build_W_continuous({Vector{1.0, 1.0}, Vector{1.0}}, {2, 1}, {}), VariantError);
}

TEST(ContinuousF, FallbackUsesDiscontinuousConstruction) {
  const SystemDims dims{1, 2};
  const Estimate est{Vector{0.0, 1.0}, Vector{1.0, 2.0}};
  const auto out = build_F(est, dims, ContinuousVariant{}, true);
  EXPECT_TRUE(out.fell_back);
  expect_near(out.F_hat, build_F_discontinuous(est, dims, {}).F_hat, 0.0);
}

TEST(ContinuousScalarF, Examples) {
  // xhat_3 [exp(-r)/x1, (1 - exp(-r))/x2] with r = x2 / x1.
  expect_near(build_F_continuous_scalar({Vector{1.0, 1.0}, Vector{2.0}}),
              Matrix{{2.0 / kE, 2.0 * (1.0 - 1.0 / kE)}}, 1e-15);
  EXPECT_NEAR(build_F_continuous_scalar({Vector{1.0, 1.0}, Vector{2.0}})(0, 0), 0.735759, 1e-6);
  EXPECT_NEAR(build_F_continuous_scalar({Vector{1.0, 1.0}, Vector{2.0}})(0, 1), 1.264241, 1e-6);
  expect_near(build_F_continuous_scalar({Vector{0.5, -2.0}, Vector{0.0}}), Matrix(1, 2), 0.0);
  expect_near(build_F_continuous_scalar({Vector{1.0, -1.0}, Vector{1.0}}),
              Matrix{{kE, kE - 1.0}}, 1e-14);
}

TEST(ContinuousScalarF, Singular) {
  EXPECT_THROW(build_F_continuous_scalar({Vector{0.0, 1.0}, Vector{1.0}}), SingularStateError);
  EXPECT_THROW(build_F_continuous_scalar({Vector{1.0, 0.0}, Vector{1.0}}), SingularStateError);
  EXPECT_THROW(build_F_continuous_scalar({Vector{1e-3, -10.0}, Vector{1.0}}), SingularStateError);
  EXPECT_THROW(validate(SdcVariant{ContinuousScalarVariant{}}, SystemDims{2, 2}), VariantError);
}

TEST(DiscontinuousF, Examples) {
  const SystemDims dims{2, 1};
  auto a = build_F_discontinuous({Vector{0.5, 2.0}, Vector{3.0}}, dims, {});
  EXPECT_EQ(a.j_star, 0u);
  EXPECT_FALSE(a.tie);
  expect_near(a.F_hat, Matrix{{3.0, 0.75}}, 1e-15);

  auto b = build_F_discontinuous({Vector{2.0, 0.5}, Vector{3.0}}, dims, {});
  EXPECT_EQ(b.j_star, 1u);
  expect_near(b.F_hat, Matrix{{0.75, 3.0}}, 1e-15);
}

TEST(DiscontinuousF, ZeroCoordinateStaysFinite) {
  const SystemDims dims{2, 1};
  for (double rho : {1.0, 2.0, -0.5}) {
    DiscontinuousVariant v;
    v.rho = Vector{rho};
    auto out = build_F_discontinuous({Vector{0.0, 1.0}, Vector{5.0}}, dims, v);
    expect_near(out.F_hat, Matrix{{5.0 * rho, 5.0}}, 1e-15);
  }
}

TEST(DiscontinuousF, TiesPickLowestIndex) {
  const SystemDims dims{2, 1};
  auto out = build_F_discontinuous({Vector{-1.5, 1.5}, Vector{1.0}}, dims, {});
  EXPECT_TRUE(out.tie);
  EXPECT_EQ(out.j_star, 0u);
  // Tie at zero: the zero-denominator entry is set to 0.
  auto zero = build_F_discontinuous({Vector{0.0, 0.0}, Vector{2.0}}, dims, {});
  EXPECT_TRUE(zero.tie);
  EXPECT_TRUE(zero.F_hat.all_finite());
  EXPECT_EQ(zero.F_hat(0, 1), 0.0);
}

TEST(DiscontinuousF, RejectsBadParameters) {
  DiscontinuousVariant v;
  v.rho = Vector{0.0};
  EXPECT_THROW(validate(SdcVariant{v}, SystemDims{2, 1}), ConfigError);
  v = {};
  v.weights = Matrix{{1.0, -1.0}};
  EXPECT_THROW(validate(SdcVariant{v}, SystemDims{2, 1}), ConfigError);
}

TEST(Assemble, CompanionBlocks) {
  const auto fact = assemble(Matrix{{2.0, 3.0}}, Matrix{{4.0}}, {2, 1});
  EXPECT_EQ(fact.A_hat, (Matrix{{0.0, 1.0}, {2.0, 3.0}}));
  EXPECT_EQ(fact.B_hat, (Matrix{{0.0}, {4.0}}));
  EXPECT_FALSE(fact.input_singular);
  EXPECT_TRUE(assemble(Matrix(1, 2), Matrix{{0.0}}, {2, 1}).input_singular);
  EXPECT_THROW(assemble(Matrix(1, 3), Matrix{{1.0}}, {2, 1}), DimensionError);
}

TEST(Controllability, Examples) {
  EXPECT_TRUE(controllability_check(assemble(Matrix(1, 2), Matrix{{1.0}}, {2, 1})));
  EXPECT_FALSE(controllability_check(assemble(Matrix(1, 2), Matrix{{0.0}}, {2, 1})));
  EXPECT_EQ(kalman_matrix(assemble(Matrix(1, 2), Matrix{{1.0}}, {2, 1})),
            (Matrix{{0.0, 1.0}, {1.0, 0.0}}));
}

TEST(SdcProperty, ControllableForInvertibleInputMatrix) {
  checks::Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = checks::random_companion_problem(rng);
    EXPECT_TRUE(controllability_check(assemble(p.F, p.G, p.dims))) << "trial " << trial;
  }
}

// The first k blocks [B, AB, ..., A^{k-1} B] have rank k rank(G_hat).  For
// n = 1 that settles the Kalman rank; for n >= 2 the later blocks can still
// complete it.
TEST(SdcProperty, SingularInputMatrixLosesRankInLeadingBlocks) {
  checks::Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = checks::random_companion_problem(rng);
    const std::size_t n = p.dims.n;
    Matrix G = p.G;
    for (std::size_t j = 0; j < n; ++j) G(n - 1, j) = n > 1 ? 3.0 * G(0, j) : 0.0;
    const auto fact = assemble(p.F, G, p.dims);
    EXPECT_TRUE(fact.input_singular);
    const Matrix C = kalman_matrix(fact);
    const Matrix leading = C.block(0, 0, p.dims.state_dim(), p.dims.k * n);
    EXPECT_EQ(matops::rank(leading), p.dims.k * matops::rank(G)) << "trial " << trial;
    if (n == 1) EXPECT_FALSE(controllability_check(fact)) << "trial " << trial;
  }
}

TEST(SdcProperty, IdentityContinuous) {
  checks::Rng rng(101);
  for (const SystemDims dims : {SystemDims{1, 2}, SystemDims{2, 2}, SystemDims{3, 2}, SystemDims{2, 3}}) {
    for (int trial = 0; trial < 500; ++trial) {
      const Estimate est = checks::random_estimate(rng, dims);
      EXPECT_TRUE(checks::sdc_identity_holds(build_F_continuous(est, dims, {}), est));
    }
  }
}

TEST(SdcProperty, IdentityContinuousCustomScales) {
  checks::Rng rng(102);
  const SystemDims dims{2, 2};
  ContinuousVariant v;
  v.varpi = 0.3;
  v.varrho = Vector{2.0, -0.5};
  for (int trial = 0; trial < 500; ++trial) {
    const Estimate est = checks::random_estimate(rng, dims);
    EXPECT_TRUE(checks::sdc_identity_holds(build_F_continuous(est, dims, v), est));
  }
}

TEST(SdcProperty, IdentityDiscontinuous) {
  checks::Rng rng(103);
  std::uniform_int_distribution<std::size_t> pick(0, 5);
  DiscontinuousVariant v;
  v.rho = Vector{1.5, -0.7};
  v.weights = Matrix{{1.0, 2.0, 3.0, 1.0}, {0.5, 0.5, 4.0, 1.0}};
  const SystemDims dims{2, 2};
  for (int trial = 0; trial < 1000; ++trial) {
    Estimate est = checks::random_estimate(rng, dims);
    EXPECT_TRUE(checks::sdc_identity_holds(build_F_discontinuous(est, dims, {}).F_hat, est));
    EXPECT_TRUE(checks::sdc_identity_holds(build_F_discontinuous(est, dims, v).F_hat, est));
    const std::size_t z = pick(rng);
    if (z < dims.state_dim()) {
      est.xhat[z] = 0.0;
      EXPECT_TRUE(checks::sdc_identity_holds(build_F_discontinuous(est, dims, v).F_hat, est));
    }
  }
}

TEST(SdcProperty, IdentityContinuousScalarUpToRounding) {
  // Both products carry rounding of size eps * |xhat_3| * exp(-r), so the
  // tolerance grows with the exponential factor.
  checks::Rng rng(104);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int trial = 0; trial < 2000; ++trial) {
    const Estimate est = checks::random_estimate(rng, {2, 1});
    const Matrix F = build_F_continuous_scalar(est);
    const double big = std::exp(-est.xhat[1] / est.xhat[0]);
    const double x3 = std::abs(est.xhat_ext[0]);
    const double err = std::abs(F(0, 0) * est.xhat[0] + F(0, 1) * est.xhat[1] - est.xhat_ext[0]);
    EXPECT_LE(err, 1e-10 * (1.0 + x3) + 8.0 * eps * x3 * (1.0 + big)) << "trial " << trial;
  }
}

// Along xhat(j) = 1e-1 .. 1e-8 with the other coordinates at 1, the SDC and
// its finite-difference Jacobian stay within 10x their value at 1e-1.
TEST(SdcProperty, ContinuousBoundedNearCoordinatePlanes) {
  for (const SystemDims dims : {SystemDims{1, 2}, SystemDims{2, 2}, SystemDims{3, 2}}) {
    for (std::size_t j = 0; j < dims.state_dim(); ++j) {
      double F_ref = 0.0;
      double J_ref = 0.0;
      for (int p = 1; p <= 8; ++p) {
        const double v = std::pow(10.0, -p);
        Vector x(dims.state_dim(), 1.0);
        x[j] = v;
        const Vector ext(dims.n, 1.0);
        const auto F_of = [&](const Vector& xx) {
          return build_F_continuous({xx, ext}, dims, {}).vec();
        };
        const double F_norm = matops::norm_inf(build_F_continuous({x, ext}, dims, {}));
        const double J_norm = matops::norm_inf(matops::jacobian_fd(F_of, x, 1e-3 * v));
        if (p == 1) {
          F_ref = F_norm;
          J_ref = J_norm;
        }
        EXPECT_LE(F_norm, 10.0 * F_ref) << "k=" << dims.k << " j=" << j << " 1e-" << p;
        EXPECT_LE(J_norm, 10.0 * J_ref) << "k=" << dims.k << " j=" << j << " 1e-" << p;
      }
    }
  }
}

}  // namespace
}  // namespace sdre_eso::sdc
