#include "sdre_eso/sdc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdre_eso/errors.hpp"

namespace sdre_eso {

void validate(const SystemDims& dims) {
  if (dims.k < 1 || dims.n < 1) {
    throw ConfigError("SystemDims: order k and dimension n must both be at least 1");
  }
}

namespace sdc {

namespace {

double channel_scale(const Vector& scales, std::size_t i) { return scales.empty() ? 1.0 : scales[i]; }

void require_nonzero_coordinates(const Vector& xhat, double threshold) {
  for (std::size_t j = 0; j < xhat.size(); ++j) {
    if (!(std::abs(xhat[j]) >= threshold) || xhat[j] == 0.0) {
      throw SingularStateError("SDC: estimate coordinate " + std::to_string(j + 1) +
                               " is zero");
    }
  }
}

void validate_scales(const Vector& scales, const SystemDims& dims, const char* what) {
  if (scales.empty()) return;
  if (scales.size() != dims.n) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(dims.n) + " entries");
  }
  for (double s : scales) {
    if (s == 0.0) throw ConfigError(std::string(what) + ": entries must be nonzero");
  }
}

}  // namespace

void validate(const Estimate& est, const SystemDims& dims) {
  if (est.xhat.size() != dims.state_dim() || est.xhat_ext.size() != dims.n) {
    throw DimensionError("Estimate: expected " + std::to_string(dims.state_dim()) + " + " +
                         std::to_string(dims.n) + " entries");
  }
}

void validate(const SdcVariant& variant, const SystemDims& dims) {
  sdre_eso::validate(dims);
  const std::size_t N = dims.state_dim();
  if (const auto* c = std::get_if<ContinuousVariant>(&variant)) {
    if (dims.n < 2) throw VariantError("continuous SDC requires n >= 2");
    if (!(c->varpi > 0.0)) throw ConfigError("continuous SDC: varpi must be positive");
    validate_scales(c->varrho, dims, "continuous SDC varrho");
    if (!c->j1.empty()) {
      if (c->j1.size() != dims.n) throw ConfigError("continuous SDC: one index set per channel");
      for (const auto& set : c->j1) {
        if (set.empty() || set.size() >= N) {
          throw ConfigError("continuous SDC: J1 and its complement must both be nonempty");
        }
        std::vector<bool> seen(N, false);
        for (std::size_t j : set) {
          if (j >= N || seen[j]) throw ConfigError("continuous SDC: invalid index in J1");
          seen[j] = true;
        }
      }
    }
  } else if (std::holds_alternative<ContinuousScalarVariant>(variant)) {
    if (dims.k != 2 || dims.n != 1) {
      throw VariantError("continuous scalar SDC requires k = 2 and n = 1");
    }
  } else {
    const auto& d = std::get<DiscontinuousVariant>(variant);
    validate_scales(d.rho, dims, "discontinuous SDC rho");
    if (d.weights.rows() != 0) {
      if (d.weights.rows() != dims.n || d.weights.cols() != N) {
        throw ConfigError("discontinuous SDC: weights must be n x kn");
      }
      for (double w : d.weights.entries()) {
        if (!(w > 0.0)) throw ConfigError("discontinuous SDC: weights must be positive");
      }
    }
  }
}

std::vector<std::size_t> index_set(std::size_t channel, const SystemDims& dims,
                                   const ContinuousVariant& variant) {
  if (!variant.j1.empty()) return variant.j1.at(channel);
  std::vector<std::size_t> set;
  for (std::size_t order = 0; order < dims.k; ++order) set.push_back(channel + order * dims.n);
  return set;
}

namespace {

// varpi * prod_{not in J1}|x| / prod_{in J1}|x|, via logs to avoid overflow
// of the raw products for tiny or large coordinates.
double weight_exponent(std::size_t channel, const Vector& xhat, const SystemDims& dims,
                       const ContinuousVariant& variant) {
  const auto in_set = index_set(channel, dims, variant);
  double log_ratio = 0.0;
  for (std::size_t j = 0; j < xhat.size(); ++j) log_ratio += std::log(std::abs(xhat[j]));
  for (std::size_t j : in_set) log_ratio -= 2.0 * std::log(std::abs(xhat[j]));
  return variant.varpi * std::exp(log_ratio);
}

}  // namespace

double exponential_weight(std::size_t channel, const Vector& xhat, const SystemDims& dims,
                          const ContinuousVariant& variant) {
  return std::exp(-weight_exponent(channel, xhat, dims, variant));
}

Matrix build_W_continuous(const Estimate& est, const SystemDims& dims,
                          const ContinuousVariant& variant) {
  if (dims.n < 2) throw VariantError("continuous SDC requires n >= 2");
  validate(est, dims);
  require_nonzero_coordinates(est.xhat, 0.0);
  const std::size_t N = dims.state_dim();
  Matrix W(dims.n, N);
  for (std::size_t i = 0; i < dims.n; ++i) {
    const auto in_set = index_set(i, dims, variant);
    std::vector<bool> member(N, false);
    for (std::size_t j : in_set) member[j] = true;
    const double size1 = static_cast<double>(in_set.size());
    const double size2 = static_cast<double>(N - in_set.size());
    const double rho = channel_scale(variant.varrho, i);
    const double a = weight_exponent(i, est.xhat, dims, variant);
    const double p = std::exp(-a);
    // 1 - rho p, without cancellation when p is close to 1.
    const double rest = (1.0 - rho) - rho * std::expm1(-a);
    for (std::size_t j = 0; j < N; ++j) {
      W(i, j) = member[j] ? rho * p / size1 : rest / size2;
    }
  }
  return W;
}

Matrix build_F_continuous(const Estimate& est, const SystemDims& dims,
                          const ContinuousVariant& variant) {
  const Matrix W = build_W_continuous(est, dims, variant);
  return hadamard(W, oslash(est.xhat_ext, est.xhat));
}

Matrix build_F_continuous_scalar(const Estimate& est) {
  validate(est, SystemDims{2, 1});
  const double x1 = est.xhat[0];
  const double x2 = est.xhat[1];
  if (x1 == 0.0 || x2 == 0.0) {
    throw SingularStateError("continuous scalar SDC: xhat_1 and xhat_2 must be nonzero");
  }
  const double e = std::exp(-x2 / x1);
  const double ext = est.xhat_ext[0];
  Matrix F(1, 2);
  F(0, 0) = ext * e / x1;
  F(0, 1) = ext * (1.0 - e) / x2;
  if (!F.all_finite()) throw SingularStateError("continuous scalar SDC: exponential overflow");
  return F;
}

DiscontinuousSdc build_F_discontinuous(const Estimate& est, const SystemDims& dims,
                                       const DiscontinuousVariant& variant) {
  validate(est, dims);
  const std::size_t N = dims.state_dim();
  const Vector& x = est.xhat;

  DiscontinuousSdc out;
  for (std::size_t l = 1; l < N; ++l) {
    if (std::abs(x[l]) < std::abs(x[out.j_star])) out.j_star = l;
  }
  for (std::size_t l = 0; l < N; ++l) {
    if (l != out.j_star && std::abs(x[l]) == std::abs(x[out.j_star])) out.tie = true;
  }
  const std::size_t js = out.j_star;

  out.F_hat = Matrix(dims.n, N);
  for (std::size_t i = 0; i < dims.n; ++i) {
    const double rho = channel_scale(variant.rho, i);
    const double ext = est.xhat_ext[i];
    const double rest = 1.0 - rho * x[js];
    double inverse_weight_sum = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == js) continue;
      inverse_weight_sum += 1.0 / (variant.weights.rows() ? variant.weights(i, j) : 1.0);
    }
    out.F_hat(i, js) = rho * ext;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == js || x[j] == 0.0) continue;
      const double raw = variant.weights.rows() ? variant.weights(i, j) : 1.0;
      const double w = raw * inverse_weight_sum;
      out.F_hat(i, j) = rest / w * ext / x[j];
    }
  }
  return out;
}

SdcEvaluation build_F(const Estimate& est, const SystemDims& dims, const SdcVariant& variant,
                      bool fallback_to_discontinuous) {
  SdcEvaluation out;
  if (const auto* d = std::get_if<DiscontinuousVariant>(&variant)) {
    auto disc = build_F_discontinuous(est, dims, *d);
    out.F_hat = std::move(disc.F_hat);
    out.tie = disc.tie;
    return out;
  }
  validate(est, dims);
  try {
    require_nonzero_coordinates(est.xhat, kSingularCoordinate);
    if (const auto* c = std::get_if<ContinuousVariant>(&variant)) {
      out.F_hat = build_F_continuous(est, dims, *c);
    } else {
      out.F_hat = build_F_continuous_scalar(est);
    }
    if (!out.F_hat.all_finite()) throw SingularStateError("continuous SDC: non-finite entry");
  } catch (const SingularStateError&) {
    if (!fallback_to_discontinuous) throw;
    auto disc = build_F_discontinuous(est, dims, DiscontinuousVariant{});
    out.F_hat = std::move(disc.F_hat);
    out.tie = disc.tie;
    out.fell_back = true;
  }
  return out;
}

SdcFactorization assemble(const Matrix& F_hat, const Matrix& G_hat, const SystemDims& dims) {
  const std::size_t N = dims.state_dim();
  if (F_hat.rows() != dims.n || F_hat.cols() != N) {
    throw DimensionError("assemble: F_hat must be n x kn");
  }
  if (G_hat.rows() != dims.n || G_hat.cols() != dims.n) {
    throw DimensionError("assemble: G_hat must be n x n");
  }
  SdcFactorization fact;
  fact.A_hat = Matrix(N, N);
  for (std::size_t i = 0; i + dims.n < N; ++i) fact.A_hat(i, i + dims.n) = 1.0;
  fact.A_hat.set_block(N - dims.n, 0, F_hat);
  fact.B_hat = Matrix(N, dims.n);
  fact.B_hat.set_block(N - dims.n, 0, G_hat);
  fact.F_hat = F_hat;
  fact.G_hat = G_hat;
  fact.input_singular = matops::rank(G_hat) < dims.n;
  return fact;
}

Matrix kalman_matrix(const SdcFactorization& fact) {
  const std::size_t N = fact.A_hat.rows();
  const std::size_t m = fact.B_hat.cols();
  Matrix C(N, N * m);
  Matrix power = fact.B_hat;
  for (std::size_t p = 0; p < N; ++p) {
    C.set_block(0, p * m, power);
    power = fact.A_hat * power;
  }
  return C;
}

bool controllability_check(const SdcFactorization& fact, double tol) {
  return matops::rank(kalman_matrix(fact), tol) == fact.A_hat.rows();
}

}  // namespace sdc
}  // namespace sdre_eso
