#pragma once

/// @file
/// Plant models and the fixed-step co-simulation of plant, observer and
/// controller.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdre_eso/controller.hpp"
#include "sdre_eso/dims.hpp"
#include "sdre_eso/errors.hpp"
#include "sdre_eso/eso.hpp"
#include "sdre_eso/matops.hpp"

namespace sdre_eso::sim {

using matops::Matrix;
using matops::Vector;

/// x_i' = x_{i+1} (i < k), x_k' = f(x) + G(x) u, y = x_1.
struct Plant {
  std::string name;
  SystemDims dims;
  std::function<Vector(const Vector&)> f;
  std::function<Matrix(const Vector&)> G;
  /// The only model knowledge available to the controller and observer.
  eso::InputMatrixFn G_hat;
  /// (df/dx)(0), n x kn, when the linearization is known.
  std::optional<Matrix> df0;
  /// B(0) = [[0], [G(0)]], kn x n.
  std::optional<Matrix> B0_true;
};

/// Inverted pendulum: theta'' = (g/l) sin(theta) - b theta' + cos(theta) u / l,
/// with G_hat = sgn(cos(theta)).  Throws ConfigError if l <= 0.
Plant pendulum_plant(double g, double l, double b);

/// f = 0, G = G_hat = I.
Plant chain_integrator_plant(const SystemDims& dims);

struct PlantCheck {
  bool drift_vanishes_at_origin = true;
  /// sgn(x^T G_hat x) == sgn(x^T G x) at every sample (n = 1: sign of G).
  bool input_sign_agrees = true;
  bool input_invertible = true;
};

/// Checks the structural assumptions on a plant at the given sample states.
PlantCheck check_plant(const Plant& plant, const std::vector<Vector>& samples);

using VectorField = std::function<Vector(double, const Vector&)>;

struct TrajectoryLog;

/// Thrown when the state leaves the divergence bound or becomes non-finite.
/// Carries the trajectory up to the failure point when raised by run().
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what, Vector state = {})
      : Error(what), state_(std::move(state)) {}

  const Vector& state() const { return state_; }

  /// Partial trajectory; null when raised outside run()/simulate().
  std::shared_ptr<const TrajectoryLog> log;

 private:
  Vector state_;
};

/// Classical fourth-order Runge-Kutta step.  Throws DivergenceError if a
/// stage derivative is not finite.
Vector rk4_step(const VectorField& deriv, const Vector& state, double t, double dt);

struct SimConfig {
  double t_final = 10.0;
  double dt = 1e-4;
  Vector x0;
  eso::EsoConfig eso;
  controller::ControllerConfig controller;
  eso::EsoState eso_init;
  /// Runs stop with DivergenceError once ||x||_inf exceeds this bound.
  double divergence_bound = 1e6;
};

/// dt > 0, t_final >= dt, dt <= epsilon / 10 for a linear high-gain
/// observer, and consistent dimensions.  Throws ConfigError.
void validate(const SimConfig& cfg, const Plant& plant);

struct LogRow {
  double t = 0.0;
  Vector x;
  Vector xhat;
  Vector xhat_ext;
  Vector u;
  controller::Mode mode = controller::Mode::Startup;
  /// Accumulated 0.5 * integral of (x^T Q x + u^T R u) up to t.
  double J = 0.0;
};

struct TrajectoryLog {
  SystemDims dims;
  std::vector<LogRow> rows;
  std::vector<controller::SwitchEvent> switch_events;
  std::size_t tie_events = 0;
  std::size_t sdre_failures = 0;
  std::vector<std::string> warnings;
};

/// Control policy evaluated once per step; the returned input is held
/// constant over the step.
using Policy = std::function<controller::ControlDecision(const sdc::Estimate&, double)>;

/// Integrates plant and observer as one stacked ODE with RK4.  Cost is
/// accumulated with the trapezoidal rule on the state term and exactly on the
/// piecewise-constant input term, using cfg.controller.Q and R.
/// Throws DivergenceError (with the partial log attached).
TrajectoryLog simulate(const Plant& plant, const SimConfig& cfg, const Policy& policy);

/// simulate() driven by a SwitchingController built from cfg.controller.
TrajectoryLog run(const Plant& plant, const SimConfig& cfg);

}  // namespace sdre_eso::sim
