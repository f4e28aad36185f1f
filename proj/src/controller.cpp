#include "sdre_eso/controller.hpp"

#include <string>
#include <utility>

#include "sdre_eso/errors.hpp"
#include "sdre_eso/riccati.hpp"

namespace sdre_eso::controller {

namespace {

Vector startup_input(const ControllerConfig& cfg) {
  return cfg.u0.empty() ? Vector(cfg.dims.n) : cfg.u0;
}

Matrix input_matrix(const ControllerConfig& cfg, const Vector& xhat) {
  Matrix G = cfg.g_hat(xhat);
  if (G.rows() != cfg.dims.n || G.cols() != cfg.dims.n) {
    throw DimensionError("controller: G_hat must return an n x n matrix");
  }
  return G;
}

// Stacked estimated drift (xhat_2, ..., xhat_k, xhat_ext).
Vector stacked_drift(const Estimate& est) {
  const std::size_t N = est.xhat.size();
  const std::size_t n = est.xhat_ext.size();
  Vector d(N);
  d.set_segment(0, est.xhat.segment(n, N - n));
  d.set_segment(N - n, est.xhat_ext);
  return d;
}

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Startup: return "startup";
    case Mode::SdreEso: return "sdre_eso";
    case Mode::Adrc: return "adrc";
  }
  return "?";
}

const char* to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::Switching: return "switching";
    case ControlMode::SdreEsoOnly: return "sdre";
    case ControlMode::AdrcOnly: return "adrc";
  }
  return "?";
}

void validate(const ControllerConfig& cfg) {
  sdre_eso::validate(cfg.dims);
  const std::size_t N = cfg.dims.state_dim();
  // Reuses the Riccati shape and definiteness checks on the chain pair.
  riccati::validate({riccati::chain_integrator_A(cfg.dims), riccati::chain_integrator_B(cfg.dims),
                     cfg.Q, cfg.R});
  sdc::validate(cfg.sdc_variant, cfg.dims);
  if (!(cfg.tau >= 0.0)) throw ConfigError("controller: tau must be non-negative");
  if (!cfg.u0.empty() && cfg.u0.size() != cfg.dims.n) {
    throw ConfigError("controller: u0 must have n entries");
  }
  if (!cfg.g_hat) throw ConfigError("controller: missing G_hat");
  if (cfg.roa && (cfg.roa->P.rows() != N || cfg.roa->P.cols() != N)) {
    throw ConfigError("controller: ROA matrix must be kn x kn");
  }
}

ControlDecision u_in(const Estimate& est, const ControllerConfig& cfg,
                     const std::optional<Matrix>& warm_K) {
  sdc::validate(est, cfg.dims);
  const auto sdc_eval = sdc::build_F(est, cfg.dims, cfg.sdc_variant, cfg.continuous_fallback);
  const auto fact = sdc::assemble(sdc_eval.F_hat, input_matrix(cfg, est.xhat), cfg.dims);
  const auto sol = riccati::solve_care({fact.A_hat, fact.B_hat, cfg.Q, cfg.R}, warm_K);

  ControlDecision d;
  d.u = -(sol.K * est.xhat);
  d.active_mode = Mode::SdreEso;
  d.K_used = sol.K;
  d.tie = sdc_eval.tie;
  return d;
}

Matrix adrc_gain(const SystemDims& dims, const Matrix& Q, const Matrix& R) {
  return riccati::solve_care(
             {riccati::chain_integrator_A(dims), riccati::chain_integrator_B(dims), Q, R})
      .K;
}

ControlDecision u_out(const Estimate& est, const ControllerConfig& cfg, const Matrix& K_out) {
  sdc::validate(est, cfg.dims);
  ControlDecision d;
  d.u = -matops::solve_linear(input_matrix(cfg, est.xhat), K_out * est.xhat + est.xhat_ext);
  d.active_mode = Mode::Adrc;
  d.K_used = K_out;
  return d;
}

double roa_value(const Estimate& est, const Matrix& P, const Matrix& B_hat, const Matrix& K_in) {
  const Vector closed = stacked_drift(est) - B_hat * (K_in * est.xhat);
  return dot(est.xhat, P * closed);
}

double roa_value_product(const Estimate& est, const Matrix& P, const sdc::SdcFactorization& fact,
                         const Matrix& K_in) {
  return dot(est.xhat, P * ((fact.A_hat - fact.B_hat * K_in) * est.xhat));
}

RoaMembership roa_contains(const Estimate& est, const ControllerConfig& cfg) {
  if (!cfg.roa) throw ConfigError("roa_contains: no ROA data configured");
  const ControlDecision d = u_in(est, cfg);
  const auto B_hat = sdc::assemble(Matrix(cfg.dims.n, cfg.dims.state_dim()),
                                   input_matrix(cfg, est.xhat), cfg.dims)
                         .B_hat;
  const double v = roa_value(est, cfg.roa->P, B_hat, d.K_used);
  return {v < 0.0, v};
}

RoaData closed_loop_jacobian(const Matrix& df0, const Matrix& B0, const Matrix& Q, const Matrix& R,
                             JacobianSign sign) {
  const std::size_t n = df0.rows();
  const std::size_t N = df0.cols();
  if (n == 0 || N % n != 0 || B0.rows() != N || B0.cols() != n) {
    throw DimensionError("closed_loop_jacobian: df0 must be n x kn and B(0) kn x n");
  }
  const SystemDims dims{N / n, n};
  Matrix J = riccati::chain_integrator_A(dims);
  J.set_block(N - n, 0, df0);

  RoaData roa;
  roa.P_in0 = riccati::solve_care({J, B0, Q, R}).P;
  const Matrix feedback = B0 * matops::solve_linear(R, B0.transpose()) * roa.P_in0;
  roa.J_cl0 = sign == JacobianSign::Minus ? J - feedback : J + feedback;
  if (!riccati::is_hurwitz(roa.J_cl0)) {
    throw AlgorithmFailure("closed_loop_jacobian: closed-loop Jacobian is not Hurwitz");
  }
  roa.P = riccati::solve_lyapunov(roa.J_cl0, kRoaLyapunovWeight * Matrix::identity(N));
  if (!riccati::is_positive_definite(roa.P)) {
    throw AlgorithmFailure("closed_loop_jacobian: Lyapunov matrix is not positive definite");
  }
  return roa;
}

ControlDecision select_control(const Estimate& est, double t, const ControllerConfig& cfg,
                               const Matrix& K_out) {
  if (t < cfg.tau) {
    ControlDecision d;
    d.u = startup_input(cfg);
    d.active_mode = Mode::Startup;
    return d;
  }
  if (cfg.mode == ControlMode::AdrcOnly ||
      (cfg.mode == ControlMode::Switching && !cfg.roa)) {
    return u_out(est, cfg, K_out);
  }
  ControlDecision in;
  try {
    in = u_in(est, cfg);
  } catch (const Error&) {
    return u_out(est, cfg, K_out);
  }
  if (cfg.mode == ControlMode::SdreEsoOnly) return in;

  const auto B_hat = sdc::assemble(Matrix(cfg.dims.n, cfg.dims.state_dim()),
                                   input_matrix(cfg, est.xhat), cfg.dims)
                         .B_hat;
  in.roa_value = roa_value(est, cfg.roa->P, B_hat, in.K_used);
  if (in.roa_value < 0.0) return in;
  ControlDecision out = u_out(est, cfg, K_out);
  out.roa_value = in.roa_value;
  out.tie = in.tie;
  return out;
}

// ---------------------------------------------------------------- SwitchingController

SwitchingController::SwitchingController(ControllerConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  K_out_ = adrc_gain(cfg_.dims, cfg_.Q, cfg_.R);
  if (cfg_.mode == ControlMode::Switching && !cfg_.roa) {
    warnings_.push_back("switching mode without ROA data; running ADRC only");
    cfg_.mode = ControlMode::AdrcOnly;
  }
}

ControlDecision SwitchingController::sdre_or_fallback(const Estimate& est, bool want_roa) {
  ControlDecision d;
  try {
    d = u_in(est, cfg_, warm_K_);
  } catch (const Error&) {
    ++sdre_failures_;
    warm_K_.reset();
    return u_out(est, cfg_, K_out_);
  }
  warm_K_ = d.K_used;
  if (want_roa) {
    const Matrix B_hat = sdc::assemble(Matrix(cfg_.dims.n, cfg_.dims.state_dim()),
                                       input_matrix(cfg_, est.xhat), cfg_.dims)
                             .B_hat;
    d.roa_value = roa_value(est, cfg_.roa->P, B_hat, d.K_used);
  }
  return d;
}

ControlDecision SwitchingController::decide(const Estimate& est, double t) {
  ControlDecision d;
  if (t < cfg_.tau) {
    d.u = startup_input(cfg_);
    d.active_mode = Mode::Startup;
  } else if (cfg_.mode == ControlMode::AdrcOnly) {
    d = u_out(est, cfg_, K_out_);
  } else if (cfg_.mode == ControlMode::SdreEsoOnly) {
    d = sdre_or_fallback(est, false);
  } else {
    d = sdre_or_fallback(est, true);
    const bool sdre_ok = d.active_mode == Mode::SdreEso;
    Mode wanted = sdre_ok && d.roa_value < 0.0 ? Mode::SdreEso : Mode::Adrc;
    const bool dwelling = last_mode_ && *last_mode_ != Mode::Startup &&
                          since_switch_ < cfg_.dwell_steps;
    if (dwelling && !(*last_mode_ == Mode::SdreEso && !sdre_ok)) wanted = *last_mode_;
    if (wanted == Mode::Adrc && d.active_mode != Mode::Adrc) {
      const double v = d.roa_value;
      const bool tie = d.tie;
      d = u_out(est, cfg_, K_out_);
      d.roa_value = v;
      d.tie = tie;
    }
  }
  record(d, t);
  return d;
}

void SwitchingController::record(const ControlDecision& d, double t) {
  if (d.tie) ++ties_;
  if (last_mode_ && *last_mode_ != d.active_mode) {
    events_.push_back({t, *last_mode_, d.active_mode});
    since_switch_ = 0;
  }
  ++since_switch_;
  last_mode_ = d.active_mode;
}

}  // namespace sdre_eso::controller
