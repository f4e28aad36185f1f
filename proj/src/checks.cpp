#include "sdre_eso/checks.hpp"

#include <cmath>
#include <exception>

#include "sdre_eso/errors.hpp"

namespace sdre_eso::checks {

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double determinant(const Matrix& G) {
  if (G.rows() == 1) return G(0, 0);
  return G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
}

}  // namespace

CompanionProblem random_companion_problem(Rng& rng) {
  CompanionProblem p;
  p.dims.k = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  p.dims.n = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
  const std::size_t N = p.dims.state_dim();
  const std::size_t n = p.dims.n;

  p.F = Matrix(n, N);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < N; ++j) p.F(i, j) = uniform(rng, -5.0, 5.0);
  do {
    p.G = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p.G(i, j) = uniform(rng, -2.0, 2.0);
  } while (std::abs(determinant(p.G)) < 0.1);

  Matrix M(N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) M(i, j) = uniform(rng, -1.0, 1.0);
  Matrix R(n, n);
  for (std::size_t i = 0; i < n; ++i) R(i, i) = uniform(rng, 0.5, 2.0);

  const auto fact = sdc::assemble(p.F, p.G, p.dims);
  p.care = {fact.A_hat, fact.B_hat, symmetrize(M.transpose() * M) + 0.1 * Matrix::identity(N), R};
  return p;
}

sdc::Estimate random_estimate(Rng& rng, const SystemDims& dims) {
  sdc::Estimate est{Vector(dims.state_dim()), Vector(dims.n), 0.0};
  std::bernoulli_distribution negative(0.5);
  for (std::size_t i = 0; i < est.xhat.size(); ++i) {
    const double magnitude = uniform(rng, 0.1, 10.0);
    est.xhat[i] = negative(rng) ? -magnitude : magnitude;
  }
  for (std::size_t i = 0; i < dims.n; ++i) est.xhat_ext[i] = uniform(rng, -10.0, 10.0);
  return est;
}

CareCheck check_care(const riccati::CareProblem& prob) {
  CareCheck check;
  try {
    const auto sol = riccati::solve_care(prob);
    check.residual = sol.residual_norm;
    if (!(sol.residual_norm <= 1e-8)) {
      check.failure = "residual " + std::to_string(sol.residual_norm);
    } else if (norm_fro(sol.P - sol.P.transpose()) > 1e-12 * norm_fro(sol.P) ||
               !riccati::is_positive_definite(sol.P)) {
      check.failure = "P not symmetric positive definite";
    } else if (!riccati::is_hurwitz(prob.A - prob.B * sol.K)) {
      check.failure = "closed loop not Hurwitz";
    } else {
      check.passed = true;
    }
  } catch (const Error& e) {
    check.failure = e.what();
  }
  return check;
}

bool sdc_identity_holds(const Matrix& F_hat, const sdc::Estimate& est) {
  return norm2(F_hat * est.xhat - est.xhat_ext) <= 1e-10 * (1.0 + norm2(est.xhat_ext));
}

PropertyTally run_property_sweep(std::size_t count, std::uint64_t base_seed) {
  PropertyTally tally;
  const SystemDims continuous_dims{2, 2};
  const SystemDims scalar_dims{2, 1};
  for (std::size_t s = 0; s < count; ++s) {
    Rng rng(base_seed + s);
    const auto prob = random_companion_problem(rng);
    ++tally.care_total;
    const CareCheck care = check_care(prob.care);
    if (care.passed) {
      ++tally.care_passed;
    } else {
      tally.failures.push_back("seed " + std::to_string(base_seed + s) + ": CARE: " + care.failure);
    }

    const std::pair<const char*, std::pair<SystemDims, sdc::SdcVariant>> cases[] = {
        {"continuous", {continuous_dims, sdc::ContinuousVariant{}}},
        {"continuous_scalar", {scalar_dims, sdc::ContinuousScalarVariant{}}},
        {"discontinuous", {prob.dims, sdc::DiscontinuousVariant{}}},
    };
    for (const auto& [name, c] : cases) {
      const auto est = random_estimate(rng, c.first);
      ++tally.sdc_total;
      bool ok = false;
      try {
        ok = sdc_identity_holds(sdc::build_F(est, c.first, c.second).F_hat, est);
      } catch (const Error&) {
        ok = false;
      }
      if (ok) {
        ++tally.sdc_passed;
      } else {
        tally.failures.push_back("seed " + std::to_string(base_seed + s) + ": SDC identity (" +
                                 name + ")");
      }
    }
  }
  return tally;
}

}  // namespace sdre_eso::checks
