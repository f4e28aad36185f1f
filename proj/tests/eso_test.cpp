#include "sdre_eso/eso.hpp"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "sdre_eso/errors.hpp"
#include "sdre_eso/sim.hpp"

namespace sdre_eso::eso {
namespace {

EsoConfig chain_config(double epsilon, std::vector<double> c = {3.0, 3.0, 1.0}) {
  return {SystemDims{2, 1}, LinearHighGain{epsilon, std::move(c)},
          [](const Vector&) { return Matrix{{1.0}}; }, false};
}

TEST(DefaultCoefficients, BinomialRows) {
  EXPECT_EQ(default_coefficients(1), (std::vector<double>{2.0, 1.0}));
  EXPECT_EQ(default_coefficients(2), (std::vector<double>{3.0, 3.0, 1.0}));
  EXPECT_EQ(default_coefficients(3), (std::vector<double>{4.0, 6.0, 4.0, 1.0}));
}

TEST(EsoDerivative, AtRestIsZero) {
  const EsoState s{Vector{0.0, 0.0}, Vector{0.0}};
  const auto d = eso_derivative(s, Vector{0.0}, Vector{0.0}, chain_config(0.01));
  EXPECT_EQ(d.xhat, (Vector{0.0, 0.0}));
  EXPECT_EQ(d.xhat_ext, (Vector{0.0}));
}

TEST(EsoDerivative, UnitInjection) {
  const EsoState s{Vector{0.0, 0.0}, Vector{0.0}};
  const auto d = eso_derivative(s, Vector{1.0}, Vector{0.0}, chain_config(1.0));
  EXPECT_EQ(d.xhat, (Vector{3.0, 3.0}));
  EXPECT_EQ(d.xhat_ext, (Vector{1.0}));
}

TEST(EsoDerivative, HighGainScaling) {
  const EsoState s{Vector{0.0, 0.0}, Vector{0.0}};
  const auto d = eso_derivative(s, Vector{1.0}, Vector{0.0}, chain_config(0.01));
  EXPECT_NEAR(d.xhat[0], 300.0, 1e-9);
  EXPECT_NEAR(d.xhat[1], 3e4, 1e-7);
  EXPECT_NEAR(d.xhat_ext[0], 1e6, 1e-4);
}

TEST(EsoDerivative, ChainAndInputTerms) {
  // Zero innovation: d xhat_1 = xhat_2, d xhat_2 = xhat_ext + G_hat u.
  const EsoState s{Vector{0.5, -2.0}, Vector{4.0}};
  auto cfg = chain_config(0.01);
  cfg.g_hat = [](const Vector&) { return Matrix{{-2.0}}; };
  const auto d = eso_derivative(s, Vector{0.5}, Vector{1.5}, cfg);
  EXPECT_EQ(d.xhat, (Vector{-2.0, 1.0}));
  EXPECT_EQ(d.xhat_ext, (Vector{0.0}));
}

TEST(EsoDerivative, InputMatrixFromMeasurement) {
  const EsoState s{Vector{0.1, 0.0}, Vector{0.0}};
  auto cfg = chain_config(1.0);
  cfg.g_hat = [](const Vector& x) { return Matrix{{x[0] > 0.0 ? 1.0 : -1.0}}; };
  cfg.g_hat_from_measurement = true;
  // y = -1 flips the sign seen by G_hat; the innovation is -1.1.
  const auto d = eso_derivative(s, Vector{-1.0}, Vector{2.0}, cfg);
  EXPECT_NEAR(d.xhat[1], 3.0 * -1.1 - 2.0, 1e-15);
}

TEST(EsoDerivative, CustomInjection) {
  EsoConfig cfg{SystemDims{1, 1}, CustomGain{{[](const Vector& v) { return 2.0 * v; },
                                             [](const Vector& v) { return v[0] * v; }}},
                [](const Vector&) { return Matrix{{1.0}}; }, false};
  const auto d = eso_derivative({Vector{0.0}, Vector{0.0}}, Vector{3.0}, Vector{0.0}, cfg);
  EXPECT_EQ(d.xhat, (Vector{6.0}));
  EXPECT_EQ(d.xhat_ext, (Vector{9.0}));
}

TEST(EsoDerivative, RejectsNonFinite) {
  const EsoState s{Vector{0.0, 0.0}, Vector{0.0}};
  EXPECT_THROW(eso_derivative(s, Vector{1e300}, Vector{0.0}, chain_config(1e-10)),
               EvaluationError);
}

TEST(EsoConfig, Validation) {
  EXPECT_THROW(validate(chain_config(0.0)), ConfigError);
  EXPECT_THROW(validate(chain_config(0.01, {3.0, 3.0})), ConfigError);
  auto cfg = chain_config(0.01);
  cfg.g_hat = nullptr;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Initialize, Examples) {
  const auto s = initialize(Vector{0.1, 0.2}, Vector{0.3}, {2, 1});
  EXPECT_EQ(s.xhat, (Vector{0.1, 0.2}));
  EXPECT_EQ(s.xhat_ext, (Vector{0.3}));
  EXPECT_THROW(initialize(Vector{0.1}, Vector{0.3}, {2, 1}), DimensionError);
  EXPECT_THROW(initialize(Vector{0.1, 0.2}, Vector{0.3, 0.0}, {2, 1}), DimensionError);
}

// Pendulum driven open loop by u = sin(t); max |xhat - x| over t in [2, 5].
double steady_state_error(double epsilon) {
  const auto plant = sim::pendulum_plant(9.81, 2.5, 10.0);
  sim::SimConfig cfg;
  cfg.t_final = 5.0;
  cfg.dt = 1e-4;
  cfg.x0 = Vector{0.785398, 0.0872665};
  cfg.eso = {plant.dims, LinearHighGain{epsilon, {3.0, 3.0, 1.0}}, plant.G_hat, false};
  cfg.controller.dims = plant.dims;
  cfg.controller.Q = Matrix::identity(2);
  cfg.controller.R = Matrix{{1.0}};
  cfg.controller.mode = controller::ControlMode::AdrcOnly;
  cfg.controller.g_hat = plant.G_hat;
  cfg.eso_init = {Vector{0.0, 0.0}, Vector{0.0}};
  const auto log = sim::simulate(plant, cfg, [](const sdc::Estimate&, double t) {
    controller::ControlDecision d;
    d.u = Vector{std::sin(t)};
    return d;
  });
  double err = 0.0;
  for (const auto& row : log.rows) {
    if (row.t < 2.0) continue;
    err = std::max(err, matops::norm_inf(row.xhat - row.x));
  }
  return err;
}

TEST(EsoProperty, ErrorShrinksWithEpsilon) {
  double previous = INFINITY;
  for (double epsilon : {0.05, 0.02, 0.01, 0.005}) {
    const double err = steady_state_error(epsilon);
    EXPECT_LE(err, previous) << "epsilon " << epsilon;
    previous = err;
  }
  EXPECT_LT(previous, 0.01);
}

}  // namespace
}  // namespace sdre_eso::eso
