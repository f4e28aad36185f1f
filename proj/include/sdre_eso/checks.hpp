#pragma once

/// @file
/// Randomized property checks for the Riccati solver and the SDC
/// constructions, shared by the test suite and `sdre_eso_cli validate
/// --seed-sweep`.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sdre_eso/dims.hpp"
#include "sdre_eso/matops.hpp"
#include "sdre_eso/riccati.hpp"
#include "sdre_eso/sdc.hpp"

namespace sdre_eso::checks {

using matops::Matrix;
using matops::Vector;
using Rng = std::mt19937_64;

/// Block-companion Riccati problem with F entries uniform in [-5, 5], an
/// invertible G (|det| >= 0.1, entries in [-2, 2]), Q = M^T M + 0.1 I and
/// R = diag in [0.5, 2].  k in {1, 2, 3}, n in {1, 2}.
struct CompanionProblem {
  SystemDims dims;
  Matrix F;
  Matrix G;
  riccati::CareProblem care;
};

CompanionProblem random_companion_problem(Rng& rng);

/// Estimate with |xhat(i)| uniform in [0.1, 10], random signs, and
/// xhat_ext uniform in [-10, 10].
sdc::Estimate random_estimate(Rng& rng, const SystemDims& dims);

struct CareCheck {
  bool passed = false;
  double residual = 0.0;
  std::string failure;
};

/// Residual <= 1e-8, P symmetric positive definite, A - B K Hurwitz.
CareCheck check_care(const riccati::CareProblem& prob);

/// ||F_hat xhat - xhat_ext|| <= 1e-10 (1 + ||xhat_ext||).
bool sdc_identity_holds(const Matrix& F_hat, const sdc::Estimate& est);

struct PropertyTally {
  std::size_t care_total = 0;
  std::size_t care_passed = 0;
  std::size_t sdc_total = 0;
  std::size_t sdc_passed = 0;
  std::vector<std::string> failures;

  bool ok() const { return care_passed == care_total && sdc_passed == sdc_total; }
};

/// For each of `count` seeds: one random Riccati problem and one random
/// estimate per SDC variant (continuous n = 2, continuous scalar,
/// discontinuous).  Deterministic for a given base seed.
PropertyTally run_property_sweep(std::size_t count, std::uint64_t base_seed = 0);

}  // namespace sdre_eso::checks
