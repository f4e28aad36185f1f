#include "sdre_eso/sim.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "sdre_eso/riccati.hpp"

namespace sdre_eso::sim {

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double quadratic(const Vector& x, const Matrix& W) { return dot(x, W * x); }

}  // namespace

Plant pendulum_plant(double g, double l, double b) {
  if (!(l > 0.0)) throw ConfigError("pendulum_plant: length l must be positive");
  Plant p;
  p.name = "pendulum";
  p.dims = {2, 1};
  p.f = [g, l, b](const Vector& x) { return Vector{(g / l) * std::sin(x[0]) - b * x[1]}; };
  p.G = [l](const Vector& x) { return Matrix{{std::cos(x[0]) / l}}; };
  p.G_hat = [](const Vector& x) {
    return Matrix{{static_cast<double>(sign_of(std::cos(x[0])))}};
  };
  p.df0 = Matrix{{g / l, -b}};
  p.B0_true = Matrix{{0.0}, {1.0 / l}};
  return p;
}

Plant chain_integrator_plant(const SystemDims& dims) {
  sdre_eso::validate(dims);
  Plant p;
  p.name = "chain_integrator";
  p.dims = dims;
  p.f = [n = dims.n](const Vector&) { return Vector(n); };
  p.G = [n = dims.n](const Vector&) { return Matrix::identity(n); };
  p.G_hat = p.G;
  p.df0 = Matrix(dims.n, dims.state_dim());
  p.B0_true = riccati::chain_integrator_B(dims);
  return p;
}

PlantCheck check_plant(const Plant& plant, const std::vector<Vector>& samples) {
  PlantCheck check;
  const std::size_t n = plant.dims.n;
  check.drift_vanishes_at_origin = norm_inf(plant.f(Vector(plant.dims.state_dim()))) == 0.0;
  for (const Vector& x : samples) {
    const Matrix G = plant.G(x);
    const Matrix G_hat = plant.G_hat(x);
    if (matops::rank(G) < n) check.input_invertible = false;
    const Vector v = n == 1 ? Vector{1.0} : x.segment(0, n);
    if (norm_inf(v) == 0.0) continue;
    if (sign_of(quadratic(v, G)) != sign_of(quadratic(v, G_hat))) check.input_sign_agrees = false;
  }
  return check;
}

Vector rk4_step(const VectorField& deriv, const Vector& state, double t, double dt) {
  auto stage = [&](double ts, const Vector& zs) {
    Vector d = deriv(ts, zs);
    if (!d.all_finite()) {
      throw DivergenceError("rk4_step: non-finite derivative at t = " + std::to_string(ts), zs);
    }
    return d;
  };
  const Vector k1 = stage(t, state);
  const Vector k2 = stage(t + 0.5 * dt, state + (0.5 * dt) * k1);
  const Vector k3 = stage(t + 0.5 * dt, state + (0.5 * dt) * k2);
  const Vector k4 = stage(t + dt, state + dt * k3);
  Vector next(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    next[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return next;
}

void validate(const SimConfig& cfg, const Plant& plant) {
  const SystemDims& dims = plant.dims;
  if (!(cfg.dt > 0.0)) throw ConfigError("simulation: dt must be positive");
  if (!(cfg.t_final >= cfg.dt)) throw ConfigError("simulation: t_final must be at least dt");
  if (cfg.x0.size() != dims.state_dim()) throw ConfigError("simulation: x0 must have kn entries");
  if (!(cfg.eso.dims == dims) || !(cfg.controller.dims == dims)) {
    throw ConfigError("simulation: observer/controller dimensions differ from the plant");
  }
  eso::validate(cfg.eso);
  controller::validate(cfg.controller);
  if (cfg.eso_init.xhat.size() != dims.state_dim() || cfg.eso_init.xhat_ext.size() != dims.n) {
    throw ConfigError("simulation: observer initial state has wrong dimensions");
  }
  if (const auto* lin = std::get_if<eso::LinearHighGain>(&cfg.eso.gain)) {
    if (cfg.dt > lin->epsilon / 10.0 * (1.0 + 1e-12)) {
      throw ConfigError("simulation: dt = " + std::to_string(cfg.dt) +
                        " exceeds epsilon / 10 = " + std::to_string(lin->epsilon / 10.0));
    }
  }
}

TrajectoryLog simulate(const Plant& plant, const SimConfig& cfg, const Policy& policy) {
  validate(cfg, plant);
  const std::size_t N = plant.dims.state_dim();
  const std::size_t n = plant.dims.n;
  const std::size_t k = plant.dims.k;
  const Matrix& Q = cfg.controller.Q;
  const Matrix& R = cfg.controller.R;

  Vector z(2 * N + n);
  z.set_segment(0, cfg.x0);
  z.set_segment(N, cfg.eso_init.xhat);
  z.set_segment(2 * N, cfg.eso_init.xhat_ext);

  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
  TrajectoryLog log;
  log.dims = plant.dims;
  log.rows.reserve(steps + 1);

  double J = 0.0;
  try {
    for (std::size_t s = 0;; ++s) {
      const double t = static_cast<double>(s) * cfg.dt;
      const Vector x = z.segment(0, N);
      sdc::Estimate est{z.segment(N, N), z.segment(2 * N, n), t};
      controller::ControlDecision decision = policy(est, t);
      if (!decision.u.all_finite() || decision.u.size() != n) {
        throw DivergenceError("simulate: control input is not finite at t = " + std::to_string(t),
                              x);
      }
      log.rows.push_back({t, x, est.xhat, est.xhat_ext, decision.u, decision.active_mode, J});
      if (s == steps) break;

      const Vector u = decision.u;
      const VectorField field = [&](double, const Vector& zz) {
        Vector dz(zz.size());
        const Vector xs = zz.segment(0, N);
        for (std::size_t i = 0; i + 1 < k; ++i) dz.set_segment(i * n, xs.segment((i + 1) * n, n));
        dz.set_segment((k - 1) * n, plant.f(xs) + plant.G(xs) * u);
        const eso::EsoState obs{zz.segment(N, N), zz.segment(2 * N, n)};
        const eso::EsoState d = eso::eso_derivative(obs, xs.segment(0, n), u, cfg.eso);
        dz.set_segment(N, d.xhat);
        dz.set_segment(2 * N, d.xhat_ext);
        return dz;
      };
      Vector next;
      try {
        next = rk4_step(field, z, t, cfg.dt);
      } catch (const EvaluationError& e) {
        throw DivergenceError(e.what(), x);
      }
      const Vector x_next = next.segment(0, N);
      if (!x_next.all_finite() || norm_inf(x_next) > cfg.divergence_bound) {
        throw DivergenceError("simulate: state left the divergence bound at t = " +
                                  std::to_string(t + cfg.dt),
                              x_next);
      }
      J += 0.25 * cfg.dt * (quadratic(x, Q) + quadratic(x_next, Q)) +
           0.5 * cfg.dt * quadratic(u, R);
      z = std::move(next);
    }
  } catch (DivergenceError& e) {
    e.log = std::make_shared<const TrajectoryLog>(std::move(log));
    throw;
  }
  return log;
}

TrajectoryLog run(const Plant& plant, const SimConfig& cfg) {
  controller::SwitchingController ctrl(cfg.controller);
  auto finish = [&ctrl](TrajectoryLog& log) {
    log.switch_events = ctrl.switch_events();
    log.tie_events = ctrl.tie_count();
    log.sdre_failures = ctrl.sdre_failures();
    log.warnings = ctrl.warnings();
  };
  try {
    TrajectoryLog log =
        simulate(plant, cfg, [&ctrl](const sdc::Estimate& est, double t) {
          return ctrl.decide(est, t);
        });
    finish(log);
    return log;
  } catch (DivergenceError& e) {
    if (e.log) {
      auto partial = std::make_shared<TrajectoryLog>(*e.log);
      finish(*partial);
      e.log = std::move(partial);
    }
    throw;
  }
}

}  // namespace sdre_eso::sim
