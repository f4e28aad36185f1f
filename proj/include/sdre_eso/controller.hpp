#pragma once

/// @file
/// Three-mode switching stabilizer: a constant start-up input while the
/// observer settles, the pointwise Riccati (SDRE+ESO) law inside an
/// estimated region of attraction, and the disturbance-cancelling ADRC law
/// outside it.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdre_eso/dims.hpp"
#include "sdre_eso/eso.hpp"
#include "sdre_eso/matops.hpp"
#include "sdre_eso/sdc.hpp"

namespace sdre_eso::controller {

using matops::Matrix;
using matops::Vector;
using sdc::Estimate;

/// Numeric values are the CSV encoding of the mode column.
enum class Mode { Startup = 0, SdreEso = 1, Adrc = 2 };

enum class ControlMode { Switching, SdreEsoOnly, AdrcOnly };

const char* to_string(Mode mode);
const char* to_string(ControlMode mode);

/// Quadratic Lyapunov data for the region-of-attraction test.
struct RoaData {
  Matrix P;      ///< solves J_cl0^T P + P J_cl0 + 1e-6 I = 0
  Matrix J_cl0;  ///< closed-loop Jacobian at the origin
  Matrix P_in0;  ///< Riccati solution of the linearization
};

struct ControllerConfig {
  SystemDims dims;
  Matrix Q;
  Matrix R;
  sdc::SdcVariant sdc_variant = sdc::DiscontinuousVariant{};
  /// Start-up phase length; the start-up input applies while t < tau.
  double tau = 0.0;
  /// Start-up input; empty means zero.
  Vector u0;
  ControlMode mode = ControlMode::Switching;
  std::optional<RoaData> roa;
  eso::InputMatrixFn g_hat;
  /// Use the discontinuous SDC when a continuous variant hits its singular
  /// set instead of falling back to ADRC.
  bool continuous_fallback = true;
  /// After a mode change, hold the new mode for this many evaluations.
  std::size_t dwell_steps = 0;
};

/// Throws ConfigError / DimensionError / VariantError.
void validate(const ControllerConfig& cfg);

struct ControlDecision {
  Vector u;
  Mode active_mode = Mode::Startup;
  Matrix K_used;
  /// x^T P (drift - B K x); NaN when the ROA test was not evaluated.
  double roa_value = std::numeric_limits<double>::quiet_NaN();
  bool tie = false;
};

/// u = -K_in(xhat) xhat with K_in from the Riccati equation of the
/// estimated SDC pair.  warm_K seeds the Kleinman iteration when it is
/// still stabilizing.  Propagates SingularStateError, NotStabilizableError
/// and ConvergenceError.
ControlDecision u_in(const Estimate& est, const ControllerConfig& cfg,
                     const std::optional<Matrix>& warm_K = std::nullopt);

/// ADRC gain K_out = R^{-1} B0^T P_out for the chain-integrator pair.
Matrix adrc_gain(const SystemDims& dims, const Matrix& Q, const Matrix& R);

/// u = -G_hat(xhat)^{-1} (K_out xhat + xhat_ext).  Throws SingularError.
ControlDecision u_out(const Estimate& est, const ControllerConfig& cfg, const Matrix& K_out);

/// xhat^T P (d - B_hat K_in xhat) with the drift stacked as
/// d = (xhat_2, ..., xhat_k, xhat_ext).
double roa_value(const Estimate& est, const Matrix& P, const Matrix& B_hat, const Matrix& K_in);

/// Same quantity evaluated as xhat^T P (A_hat - B_hat K_in) xhat.
double roa_value_product(const Estimate& est, const Matrix& P, const sdc::SdcFactorization& fact,
                         const Matrix& K_in);

struct RoaMembership {
  bool inside = false;
  double value = 0.0;
};

/// Strict test value < 0.  Throws ConfigError if cfg.roa is empty.
RoaMembership roa_contains(const Estimate& est, const ControllerConfig& cfg);

enum class JacobianSign {
  /// J_cl = J - B R^{-1} B^T P_in, consistent with u_in = -K_in x.
  Minus,
  /// J_cl = J + B R^{-1} B^T P_in.
  Plus,
};

/// Offline closed-loop Jacobian at the origin: J(0) = [[0, I], [df0]],
/// P_in(0) from its Riccati equation with B(0), the closed-loop Jacobian,
/// then P from the Lyapunov equation with right-hand side 1e-6 I.
/// Throws AlgorithmFailure if J_cl is not Hurwitz or P is not positive
/// definite.
RoaData closed_loop_jacobian(const Matrix& df0, const Matrix& B0, const Matrix& Q, const Matrix& R,
                             JacobianSign sign = JacobianSign::Minus);

inline constexpr double kRoaLyapunovWeight = 1e-6;

/// Pure mode selection for one evaluation (no warm start, no dwell).
ControlDecision select_control(const Estimate& est, double t, const ControllerConfig& cfg,
                               const Matrix& K_out);

struct SwitchEvent {
  double t = 0.0;
  Mode from = Mode::Startup;
  Mode to = Mode::Startup;
};

/// Stateful wrapper used by the simulator: carries the Kleinman warm start,
/// the dwell counter, and the event log.  One instance per run.
class SwitchingController {
 public:
  explicit SwitchingController(ControllerConfig cfg);

  ControlDecision decide(const Estimate& est, double t);

  const ControllerConfig& config() const { return cfg_; }
  const Matrix& K_out() const { return K_out_; }
  const std::vector<SwitchEvent>& switch_events() const { return events_; }
  std::size_t tie_count() const { return ties_; }
  /// u_in evaluations that failed and were replaced by u_out.
  std::size_t sdre_failures() const { return sdre_failures_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  ControlDecision sdre_or_fallback(const Estimate& est, bool want_roa);
  void record(const ControlDecision& d, double t);

  ControllerConfig cfg_;
  Matrix K_out_;
  std::optional<Matrix> warm_K_;
  std::optional<Mode> last_mode_;
  std::size_t since_switch_ = 0;
  std::vector<SwitchEvent> events_;
  std::size_t ties_ = 0;
  std::size_t sdre_failures_ = 0;
  std::vector<std::string> warnings_;
};

}  // namespace sdre_eso::controller
