#pragma once

/// @file
/// Scenario files: a sectioned key=value description of one closed-loop
/// study (plant, observer, controller, simulation horizon, ADRC sweep and
/// output location), plus the conversion into simulator inputs.
///
/// Grammar (see README for the full key list):
///
///   # comment
///   [section]
///   key = value
///
/// Values are numbers, comma-separated lists, or matrices written as rows
/// separated by ';' ("1,0;0,1").  Angles and angular rates accept a
/// deg, rad, deg/s or rad/s suffix and are stored in radians.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sdre_eso/controller.hpp"
#include "sdre_eso/matops.hpp"
#include "sdre_eso/sim.hpp"

namespace sdre_eso::scenario {

using matops::Matrix;
using matops::Vector;

struct PlantSpec {
  /// "pendulum" or "chain_integrator".
  std::string type = "pendulum";
  double g = 9.81;
  double l = 1.0;
  double b = 0.0;
  std::size_t k = 2;
  std::size_t n = 1;

  friend bool operator==(const PlantSpec&, const PlantSpec&) = default;
};

enum class ExtInit {
  /// xhat_ext(0) = f(x0), the true total disturbance at zero input.
  Drift,
  Values,
};

struct EsoSpec {
  double epsilon = 0.01;
  /// Empty means the binomial default.
  std::vector<double> coefficients;
  /// xhat(0) = x0 + state_offset; empty means zero offset.
  Vector state_offset;
  ExtInit ext = ExtInit::Drift;
  Vector ext_values;
  bool g_hat_from_measurement = false;

  friend bool operator==(const EsoSpec&, const EsoSpec&) = default;
};

enum class VariantKind { Discontinuous, Continuous, ContinuousScalar };
enum class RoaSource { Linearization, None };

struct ControllerSpec {
  controller::ControlMode mode = controller::ControlMode::Switching;
  Matrix Q;
  Matrix R;
  double tau = 0.0;
  Vector u0;
  VariantKind variant = VariantKind::Discontinuous;
  Vector rho;
  Matrix weights;
  double varpi = 1.0;
  Vector varrho;
  bool continuous_fallback = true;
  RoaSource roa = RoaSource::Linearization;
  controller::JacobianSign sign = controller::JacobianSign::Minus;
  std::size_t dwell_steps = 0;
  /// Runs with more mode switches than this are flagged as chattering.
  std::size_t max_switches = 100;

  friend bool operator==(const ControllerSpec&, const ControllerSpec&) = default;
};

/// ADRC comparison family.  Either Q scalings (K_out recomputed from
/// scale * Q) or explicit n x kn gains.
struct SweepSpec {
  std::vector<double> q_scales;
  std::vector<Matrix> gains;
  std::size_t workers = 1;

  bool empty() const { return q_scales.empty() && gains.empty(); }
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct OutputSpec {
  std::string dir = "out";
  /// Write every stride-th row (the last row is always written).
  std::size_t csv_stride = 1;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct Scenario {
  std::string name;
  PlantSpec plant;
  double t_final = 10.0;
  double dt = 1e-4;
  Vector x0;
  EsoSpec eso;
  ControllerSpec controller;
  SweepSpec sweep;
  OutputSpec output;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ConfigError with "<source>:<line>: <key>: ..." diagnostics for
/// unknown sections or keys, malformed values, missing required keys,
/// shape mismatches and dt > epsilon / 10.
Scenario parse_scenario_text(std::string_view text, const std::string& source = "<string>");

/// Reads the file and calls parse_scenario_text.  Throws ConfigError if the
/// file cannot be read.
Scenario parse_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario_text(serialize(s)) == s.
std::string serialize(const Scenario& s);

/// Names accepted by [plant] type.
std::vector<std::string> plant_types();

sim::Plant build_plant(const Scenario& s);

/// Simulator configuration for the scenario's controller mode.  The ROA
/// data is computed from the plant linearization when requested.
sim::SimConfig build_sim_config(const Scenario& s, const sim::Plant& plant);

}  // namespace sdre_eso::scenario
