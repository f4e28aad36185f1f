#include "sdre_eso/eso.hpp"

#include <cmath>
#include <string>

#include "sdre_eso/errors.hpp"

namespace sdre_eso::eso {

std::vector<double> default_coefficients(std::size_t k) {
  // Row k+1 of Pascal's triangle, skipping the leading 1.
  std::vector<double> c(k + 1);
  double value = 1.0;
  for (std::size_t i = 1; i <= k + 1; ++i) {
    value = value * static_cast<double>(k + 2 - i) / static_cast<double>(i);
    c[i - 1] = value;
  }
  return c;
}

void validate(const EsoConfig& cfg) {
  sdre_eso::validate(cfg.dims);
  if (!cfg.g_hat) throw ConfigError("EsoConfig: missing G_hat");
  if (const auto* lin = std::get_if<LinearHighGain>(&cfg.gain)) {
    if (!(lin->epsilon > 0.0)) throw ConfigError("EsoConfig: epsilon must be positive");
    if (lin->coefficients.size() != cfg.dims.k + 1) {
      throw ConfigError("EsoConfig: expected " + std::to_string(cfg.dims.k + 1) +
                        " observer coefficients");
    }
  } else {
    const auto& custom = std::get<CustomGain>(cfg.gain);
    if (custom.injections.size() != cfg.dims.k + 1) {
      throw ConfigError("EsoConfig: expected k+1 injection functions");
    }
    for (const auto& e : custom.injections) {
      if (!e) throw ConfigError("EsoConfig: empty injection function");
    }
  }
}

EsoState eso_derivative(const EsoState& state, const Vector& y, const Vector& u,
                        const EsoConfig& cfg) {
  const std::size_t k = cfg.dims.k;
  const std::size_t n = cfg.dims.n;
  if (state.xhat.size() != k * n || state.xhat_ext.size() != n || y.size() != n ||
      u.size() != n) {
    throw DimensionError("eso_derivative: inconsistent dimensions");
  }
  if (!state.xhat.all_finite() || !state.xhat_ext.all_finite() || !y.all_finite() ||
      !u.all_finite()) {
    throw EvaluationError("eso_derivative: non-finite input");
  }

  const Vector error = y - state.xhat.segment(0, n);
  auto injection = [&](std::size_t i) -> Vector {  // i is 1-based
    if (const auto* lin = std::get_if<LinearHighGain>(&cfg.gain)) {
      return (lin->coefficients[i - 1] / std::pow(lin->epsilon, static_cast<double>(i))) * error;
    }
    return std::get<CustomGain>(cfg.gain).injections[i - 1](error);
  };

  EsoState d{Vector(k * n), Vector(n)};
  for (std::size_t i = 1; i < k; ++i) {
    d.xhat.set_segment((i - 1) * n, state.xhat.segment(i * n, n) + injection(i));
  }
  Vector g_arg = state.xhat;
  if (cfg.g_hat_from_measurement) g_arg.set_segment(0, y);
  const Vector input = cfg.g_hat(g_arg) * u;
  d.xhat.set_segment((k - 1) * n, state.xhat_ext + injection(k) + input);
  d.xhat_ext = injection(k + 1);

  if (!d.xhat.all_finite() || !d.xhat_ext.all_finite()) {
    throw EvaluationError("eso_derivative: non-finite derivative");
  }
  return d;
}

EsoState initialize(const Vector& x0_guess, const Vector& ext_guess, const SystemDims& dims) {
  if (x0_guess.size() != dims.state_dim() || ext_guess.size() != dims.n) {
    throw DimensionError("eso::initialize: expected " + std::to_string(dims.state_dim()) +
                         " state and " + std::to_string(dims.n) + " extended entries");
  }
  return EsoState{x0_guess, ext_guess};
}

}  // namespace sdre_eso::eso
