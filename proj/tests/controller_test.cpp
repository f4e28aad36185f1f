#include "sdre_eso/controller.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "sdre_eso/checks.hpp"
#include "sdre_eso/errors.hpp"
#include "sdre_eso/riccati.hpp"

namespace sdre_eso::controller {
namespace {

const double kSqrt3 = std::sqrt(3.0);

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) EXPECT_NEAR(a(i, j), b(i, j), tol) << i << "," << j;
}

ControllerConfig chain_config(double g = 1.0) {
  ControllerConfig cfg;
  cfg.dims = {2, 1};
  cfg.Q = Matrix::identity(2);
  cfg.R = Matrix{{1.0}};
  cfg.g_hat = [g](const Vector&) { return Matrix{{g}}; };
  return cfg;
}

// Pendulum with g = 9.81, l = 2.5, b = 10 linearized at the origin.
const Matrix kPendulumDf0{{9.81 / 2.5, -10.0}};
const Matrix kPendulumB0{{0.0}, {1.0 / 2.5}};

TEST(UIn, ZeroDriftGivesChainIntegratorGain) {
  const auto d = u_in({Vector{0.3, -0.2}, Vector{0.0}}, chain_config());
  EXPECT_EQ(d.active_mode, Mode::SdreEso);
  expect_near(d.K_used, Matrix{{1.0, kSqrt3}}, 1e-8);
  EXPECT_NEAR(d.u[0], -(0.3 - 0.2 * kSqrt3), 1e-8);
}

TEST(UIn, MatchesAdrcGainWithoutDisturbance) {
  const auto cfg = chain_config();
  const Matrix K_out = adrc_gain(cfg.dims, cfg.Q, cfg.R);
  const auto d = u_in({Vector{1.0, 2.0}, Vector{0.0}}, cfg);
  EXPECT_LE(matops::norm_fro(d.K_used - K_out), 1e-8);
}

TEST(UIn, WarmStartGivesSameGain) {
  const auto cfg = chain_config();
  const Estimate est{Vector{0.7, -0.4}, Vector{1.3}};
  const auto cold = u_in(est, cfg);
  const auto warm = u_in(est, cfg, cold.K_used);
  expect_near(warm.K_used, cold.K_used, 1e-10);
}

TEST(UOut, Examples) {
  const auto cfg = chain_config();
  const Matrix K_out = adrc_gain(cfg.dims, cfg.Q, cfg.R);
  expect_near(K_out, Matrix{{1.0, kSqrt3}}, 1e-8);
  EXPECT_NEAR(u_out({Vector{0.0, 0.0}, Vector{1.0}}, cfg, K_out).u[0], -1.0, 1e-15);
  EXPECT_NEAR(u_out({Vector{0.0, 0.0}, Vector{2.5}}, cfg, K_out).u[0], -2.5, 1e-15);
  EXPECT_NEAR(u_out({Vector{0.0, 0.0}, Vector{1.0}}, chain_config(-1.0), K_out).u[0], 1.0, 1e-15);
  EXPECT_NEAR(u_out({Vector{1.0, 1.0}, Vector{0.0}}, chain_config(2.0), K_out).u[0],
              -(1.0 + kSqrt3) / 2.0, 1e-8);
  EXPECT_THROW(u_out({Vector{1.0, 1.0}, Vector{0.0}}, chain_config(0.0), K_out), SingularError);
}

TEST(RoaValue, Examples) {
  // k = n = 1: xhat^T P (xhat_ext - B K xhat) = 1 * (1 - 3) = -2.
  EXPECT_DOUBLE_EQ(roa_value({Vector{1.0}, Vector{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{3.0}}),
                   -2.0);
  // The origin is never inside: the test is strict.
  auto cfg = chain_config();
  cfg.roa = closed_loop_jacobian(Matrix(1, 2), Matrix{{0.0}, {1.0}}, cfg.Q, cfg.R);
  const auto m = roa_contains({Vector{0.0, 0.0}, Vector{0.0}}, cfg);
  EXPECT_EQ(m.value, 0.0);
  EXPECT_FALSE(m.inside);
  EXPECT_THROW(roa_contains({Vector{0.0, 0.0}, Vector{0.0}}, chain_config()), ConfigError);
}

TEST(RoaValue, TwoRoutesAgree) {
  checks::Rng rng(9);
  const SystemDims dims{2, 1};
  const auto cfg = chain_config();
  const Matrix P{{2.0, 0.3}, {0.3, 1.0}};
  for (int trial = 0; trial < 200; ++trial) {
    const auto est = checks::random_estimate(rng, dims);
    const auto F = sdc::build_F_discontinuous(est, dims, {}).F_hat;
    const auto fact = sdc::assemble(F, Matrix{{1.0}}, dims);
    const auto d = u_in(est, cfg);
    const double a = roa_value(est, P, fact.B_hat, d.K_used);
    const double b = roa_value_product(est, P, fact, d.K_used);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a))) << "trial " << trial;
  }
}

TEST(ClosedLoopJacobian, ChainIntegrator) {
  const auto roa =
      closed_loop_jacobian(Matrix(1, 2), Matrix{{0.0}, {1.0}}, Matrix::identity(2), Matrix{{1.0}});
  expect_near(roa.J_cl0, Matrix{{0.0, 1.0}, {-1.0, -kSqrt3}}, 1e-8);
  EXPECT_TRUE(riccati::is_hurwitz(roa.J_cl0));
  EXPECT_TRUE(riccati::is_positive_definite(roa.P));
}

TEST(ClosedLoopJacobian, Pendulum) {
  const auto roa =
      closed_loop_jacobian(kPendulumDf0, kPendulumB0, Matrix::identity(2), Matrix{{1.0}});
  // Reference values from an independent Schur-based Riccati/Lyapunov solve.
  expect_near(roa.J_cl0, Matrix{{0.0, 1.0}, {-3.9443346713989715, -10.765531540188713}}, 1e-8);
  expect_near(roa.P,
              Matrix{{1.5943200977788626e-06, 1.2676409119783367e-07},
                     {1.2676409119783367e-07, 5.8219521150262385e-08}},
              1e-14);
  const Matrix lyap = roa.J_cl0.transpose() * roa.P + roa.P * roa.J_cl0 +
                      kRoaLyapunovWeight * Matrix::identity(2);
  EXPECT_LE(matops::norm_fro(lyap), 1e-15);
}

TEST(ClosedLoopJacobian, PlusSignIsNotHurwitz) {
  EXPECT_THROW(closed_loop_jacobian(kPendulumDf0, kPendulumB0, Matrix::identity(2), Matrix{{1.0}},
                                    JacobianSign::Plus),
               AlgorithmFailure);
}

TEST(SelectControl, Branches) {
  auto cfg = chain_config();
  cfg.tau = 0.5;
  cfg.u0 = Vector{0.25};
  const Matrix K_out = adrc_gain(cfg.dims, cfg.Q, cfg.R);
  const Estimate est{Vector{0.4, 0.1}, Vector{0.2}};

  const auto start = select_control(est, 0.1, cfg, K_out);
  EXPECT_EQ(start.active_mode, Mode::Startup);
  EXPECT_EQ(start.u, (Vector{0.25}));

  cfg.mode = ControlMode::AdrcOnly;
  EXPECT_EQ(select_control(est, 1.0, cfg, K_out).active_mode, Mode::Adrc);
  cfg.mode = ControlMode::SdreEsoOnly;
  EXPECT_EQ(select_control(est, 1.0, cfg, K_out).active_mode, Mode::SdreEso);

  // Switching without ROA data degrades to ADRC.
  cfg.mode = ControlMode::Switching;
  EXPECT_EQ(select_control(est, 1.0, cfg, K_out).active_mode, Mode::Adrc);

  cfg.roa = closed_loop_jacobian(Matrix(1, 2), Matrix{{0.0}, {1.0}}, cfg.Q, cfg.R);
  const auto d = select_control(est, 1.0, cfg, K_out);
  EXPECT_EQ(d.active_mode, d.roa_value < 0.0 ? Mode::SdreEso : Mode::Adrc);
}

TEST(Validate, RejectsBadConfig) {
  auto cfg = chain_config();
  cfg.tau = -1.0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = chain_config();
  cfg.u0 = Vector{1.0, 2.0};
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = chain_config();
  cfg.g_hat = nullptr;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(SwitchingController, ReplayIsDeterministic) {
  auto cfg = chain_config();
  cfg.roa = closed_loop_jacobian(Matrix(1, 2), Matrix{{0.0}, {1.0}}, cfg.Q, cfg.R);
  checks::Rng rng(21);
  std::vector<Estimate> seq;
  for (int i = 0; i < 100; ++i) seq.push_back(checks::random_estimate(rng, cfg.dims));

  SwitchingController a(cfg);
  SwitchingController b(cfg);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double t = 0.01 * static_cast<double>(i);
    const auto da = a.decide(seq[i], t);
    const auto db = b.decide(seq[i], t);
    EXPECT_EQ(da.u, db.u);
    EXPECT_EQ(da.active_mode, db.active_mode);
  }
  EXPECT_EQ(a.switch_events().size(), b.switch_events().size());
}

TEST(SwitchingController, DwellHoldsMode) {
  auto cfg = chain_config();
  cfg.roa = closed_loop_jacobian(Matrix(1, 2), Matrix{{0.0}, {1.0}}, cfg.Q, cfg.R);
  checks::Rng rng(22);
  std::vector<Estimate> seq;
  for (int i = 0; i < 200; ++i) seq.push_back(checks::random_estimate(rng, cfg.dims));

  SwitchingController free_ctl(cfg);
  cfg.dwell_steps = 10;
  SwitchingController held(cfg);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    free_ctl.decide(seq[i], static_cast<double>(i));
    held.decide(seq[i], static_cast<double>(i));
  }
  EXPECT_LE(held.switch_events().size(), free_ctl.switch_events().size());
  EXPECT_LE(held.switch_events().size(), seq.size() / 10 + 1);
}

}  // namespace
}  // namespace sdre_eso::controller
