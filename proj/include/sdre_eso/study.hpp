#pragma once

/// @file
/// Scenario execution: single runs, the ADRC gain family, the three-way
/// comparison, CSV trajectories and summary reports.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdre_eso/controller.hpp"
#include "sdre_eso/scenario.hpp"
#include "sdre_eso/sim.hpp"

namespace sdre_eso::study {

using matops::Matrix;
using matops::Vector;

struct RunSummary {
  std::string name;
  /// "switching", "sdre", "adrc", or "adrc_sweep" for a family member.
  std::string kind;
  bool diverged = false;
  std::string error;
  std::size_t steps = 0;
  double final_t = 0.0;
  double final_x_norm = 0.0;
  double final_J = 0.0;
  double max_x_norm = 0.0;
  double max_u_norm = 0.0;
  std::size_t switches = 0;
  /// switches > the scenario's max_switches.
  bool chattering = false;
  std::size_t ties = 0;
  std::size_t sdre_failures = 0;
  double wall_seconds = 0.0;
  std::filesystem::path csv;
  std::vector<std::string> warnings;
};

struct Envelope {
  double J_min = 0.0;
  double J_max = 0.0;
};

struct Ordering {
  /// J(sdre) <= J(switching)
  bool sdre_le_switching = false;
  /// J(switching) <= max J over the ADRC family
  bool switching_le_adrc_max = false;
  /// J(sdre) <= 0.99 * min J over the ADRC family
  bool sdre_below_adrc_min = false;
};

struct SummaryReport {
  std::string scenario;
  std::vector<RunSummary> runs;
  std::optional<Envelope> adrc_envelope;
  std::optional<Ordering> ordering;

  bool any_diverged() const;
  const RunSummary* find(const std::string& name) const;
};

struct RunResult {
  sim::TrajectoryLog log;
  RunSummary summary;
};

/// "t,x_1,..,x_kn,xhat_1,..,xhat_kn,xhat_ext_1,..,xhat_ext_n,u_1,..,u_n,mode,J".
std::string csv_header(const SystemDims& dims);

/// Every stride-th row plus the last, numbers with 17 significant digits.
void write_csv(std::ostream& out, const sim::TrajectoryLog& log, std::size_t stride = 1);

/// One closed-loop run of the scenario in the given mode.  Divergence is
/// reported in the summary (with the partial log) rather than thrown.
RunResult run_mode(const scenario::Scenario& s, controller::ControlMode mode);

/// One ADRC run with a fixed gain K_out (n x kn); cost uses the scenario Q, R.
RunResult run_adrc_gain(const scenario::Scenario& s, const Matrix& K_out);

/// Gains of the ADRC comparison family.  Throws ConfigError on an empty
/// sweep.
std::vector<Matrix> sweep_gains(const scenario::Scenario& s);

/// Runs the scenario's mode and writes one CSV per run into out_dir.  In
/// adrc mode with a sweep present, every family member is run instead and
/// the J envelope is reported.
SummaryReport run_scenario(const scenario::Scenario& s, const std::filesystem::path& out_dir);

/// Switching, SDRE+ESO only and the ADRC family on identical initial
/// conditions, with the final-cost ordering.
SummaryReport compare(const scenario::Scenario& s, const std::filesystem::path& out_dir);

/// Human-readable table.
std::string format_table(const SummaryReport& report);

/// Machine-readable key=value block.
std::string format_key_values(const SummaryReport& report);

}  // namespace sdre_eso::study
