#include "sdre_eso/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include "sdre_eso/errors.hpp"

namespace sdre_eso::study {

namespace {

using Clock = std::chrono::steady_clock;

void append_number(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += buf;
}

void append_vector(std::string& line, const Vector& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    append_number(line, v[i]);
    line += ',';
  }
}

RunSummary summarize(const sim::TrajectoryLog& log) {
  RunSummary s;
  s.steps = log.rows.empty() ? 0 : log.rows.size() - 1;
  for (const auto& row : log.rows) {
    s.max_x_norm = std::max(s.max_x_norm, norm_inf(row.x));
    s.max_u_norm = std::max(s.max_u_norm, norm_inf(row.u));
  }
  if (!log.rows.empty()) {
    s.final_t = log.rows.back().t;
    s.final_x_norm = norm_inf(log.rows.back().x);
    s.final_J = log.rows.back().J;
  }
  s.switches = log.switch_events.size();
  s.ties = log.tie_events;
  s.sdre_failures = log.sdre_failures;
  s.warnings = log.warnings;
  return s;
}

// Runs fn, turning divergence into a flagged summary with the partial log.
template <typename Fn>
RunResult timed_run(Fn&& fn) {
  const auto start = Clock::now();
  RunResult result;
  try {
    result.log = fn();
    result.summary = summarize(result.log);
  } catch (const sim::DivergenceError& e) {
    if (e.log) result.log = *e.log;
    result.summary = summarize(result.log);
    result.summary.diverged = true;
    result.summary.error = e.what();
  }
  result.summary.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

// Rethrows the current exception with a prefix, keeping its class so the
// caller can still map it to an exit code.
template <typename First, typename... Rest>
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& prefix) {
  if (dynamic_cast<const First*>(&e)) throw First(prefix + e.what());
  if constexpr (sizeof...(Rest) > 0) {
    rethrow_with_context<Rest...>(e, prefix);
  } else {
    throw Error(prefix + e.what());
  }
}

struct Job {
  std::string name;
  std::string kind;
  std::function<RunResult()> run;
};

// Runs the jobs on up to `workers` threads.  Each job writes its own CSV;
// the summary is assembled in job order once all have finished.
std::vector<RunSummary> execute(const std::vector<Job>& jobs, std::size_t workers,
                                const scenario::Scenario& s, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<RunSummary> summaries(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        RunResult r = jobs[i].run();
        r.summary.name = jobs[i].name;
        r.summary.kind = jobs[i].kind;
        r.summary.chattering = r.summary.switches > s.controller.max_switches;
        r.summary.csv = out_dir / (s.name + "_" + jobs[i].name + ".csv");
        std::ofstream out(r.summary.csv, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + r.summary.csv.string());
        write_csv(out, r.log, s.output.csv_stride);
        summaries[i] = std::move(r.summary);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, jobs.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const Error& e) {
        rethrow_with_context<ConfigError, DimensionError, VariantError, SingularError,
                             EvaluationError, SingularStateError, ConvergenceError,
                             NotStabilizableError, AlgorithmFailure>(
            e, "run '" + jobs[i].name + "': ");
      }
    }
  }
  return summaries;
}

std::vector<Job> family_jobs(const scenario::Scenario& s) {
  std::vector<Job> jobs;
  const auto gains = sweep_gains(s);
  for (std::size_t i = 0; i < gains.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "adrc_%02zu", i + 1);
    jobs.push_back({name, "adrc_sweep", [&s, K = gains[i]] { return run_adrc_gain(s, K); }});
  }
  return jobs;
}

std::optional<Envelope> envelope(const std::vector<RunSummary>& runs) {
  std::optional<Envelope> env;
  for (const auto& r : runs) {
    if (r.kind != "adrc_sweep") continue;
    const double J = r.diverged ? std::numeric_limits<double>::infinity() : r.final_J;
    if (!env) env = Envelope{J, J};
    env->J_min = std::min(env->J_min, J);
    env->J_max = std::max(env->J_max, J);
  }
  return env;
}

}  // namespace

bool SummaryReport::any_diverged() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunSummary& r) { return r.diverged; });
}

const RunSummary* SummaryReport::find(const std::string& name) const {
  for (const auto& r : runs) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::string csv_header(const SystemDims& dims) {
  const std::size_t N = dims.state_dim();
  std::string h = "t";
  for (std::size_t i = 1; i <= N; ++i) h += ",x_" + std::to_string(i);
  for (std::size_t i = 1; i <= N; ++i) h += ",xhat_" + std::to_string(i);
  for (std::size_t i = 1; i <= dims.n; ++i) h += ",xhat_ext_" + std::to_string(i);
  for (std::size_t i = 1; i <= dims.n; ++i) h += ",u_" + std::to_string(i);
  return h + ",mode,J";
}

void write_csv(std::ostream& out, const sim::TrajectoryLog& log, std::size_t stride) {
  if (stride == 0) stride = 1;
  out << csv_header(log.dims) << '\n';
  std::string line;
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    if (i % stride != 0 && i + 1 != log.rows.size()) continue;
    const auto& row = log.rows[i];
    line.clear();
    append_number(line, row.t);
    line += ',';
    append_vector(line, row.x);
    append_vector(line, row.xhat);
    append_vector(line, row.xhat_ext);
    append_vector(line, row.u);
    line += std::to_string(static_cast<int>(row.mode));
    line += ',';
    append_number(line, row.J);
    out << line << '\n';
  }
}

RunResult run_mode(const scenario::Scenario& s, controller::ControlMode mode) {
  scenario::Scenario copy = s;
  copy.controller.mode = mode;
  const sim::Plant plant = scenario::build_plant(copy);
  const sim::SimConfig cfg = scenario::build_sim_config(copy, plant);
  RunResult r = timed_run([&] { return sim::run(plant, cfg); });
  r.summary.kind = controller::to_string(mode);
  return r;
}

RunResult run_adrc_gain(const scenario::Scenario& s, const Matrix& K_out) {
  scenario::Scenario copy = s;
  copy.controller.mode = controller::ControlMode::AdrcOnly;
  const sim::Plant plant = scenario::build_plant(copy);
  const sim::SimConfig cfg = scenario::build_sim_config(copy, plant);
  if (K_out.rows() != plant.dims.n || K_out.cols() != plant.dims.state_dim()) {
    throw ConfigError("run_adrc_gain: gain must be n x kn");
  }
  const controller::ControllerConfig& cc = cfg.controller;
  const auto policy = [&](const sdc::Estimate& est, double t) {
    if (t < cc.tau) return controller::select_control(est, t, cc, K_out);
    return controller::u_out(est, cc, K_out);
  };
  RunResult r = timed_run([&] { return sim::simulate(plant, cfg, policy); });
  r.summary.kind = "adrc_sweep";
  return r;
}

std::vector<Matrix> sweep_gains(const scenario::Scenario& s) {
  if (s.sweep.empty()) throw ConfigError("scenario '" + s.name + "': empty ADRC sweep");
  if (!s.sweep.gains.empty()) return s.sweep.gains;
  const sim::Plant plant = scenario::build_plant(s);
  std::vector<Matrix> gains;
  for (double q : s.sweep.q_scales) {
    gains.push_back(controller::adrc_gain(plant.dims, q * s.controller.Q, s.controller.R));
  }
  return gains;
}

SummaryReport run_scenario(const scenario::Scenario& s, const std::filesystem::path& out_dir) {
  std::vector<Job> jobs;
  const auto mode = s.controller.mode;
  if (mode == controller::ControlMode::AdrcOnly && !s.sweep.empty()) {
    jobs = family_jobs(s);
  } else {
    jobs.push_back({controller::to_string(mode), controller::to_string(mode),
                    [&s, mode] { return run_mode(s, mode); }});
  }
  SummaryReport report;
  report.scenario = s.name;
  report.runs = execute(jobs, s.sweep.workers, s, out_dir);
  report.adrc_envelope = envelope(report.runs);
  return report;
}

SummaryReport compare(const scenario::Scenario& s, const std::filesystem::path& out_dir) {
  using controller::ControlMode;
  std::vector<Job> jobs;
  for (ControlMode mode : {ControlMode::Switching, ControlMode::SdreEsoOnly}) {
    jobs.push_back({controller::to_string(mode), controller::to_string(mode),
                    [&s, mode] { return run_mode(s, mode); }});
  }
  for (Job& j : family_jobs(s)) jobs.push_back(std::move(j));

  SummaryReport report;
  report.scenario = s.name;
  report.runs = execute(jobs, s.sweep.workers, s, out_dir);
  report.adrc_envelope = envelope(report.runs);

  const RunSummary* sw = report.find("switching");
  const RunSummary* sd = report.find("sdre");
  auto cost = [](const RunSummary* r) {
    return r->diverged ? std::numeric_limits<double>::infinity() : r->final_J;
  };
  Ordering o;
  o.sdre_le_switching = cost(sd) <= cost(sw);
  o.switching_le_adrc_max = cost(sw) <= report.adrc_envelope->J_max;
  o.sdre_below_adrc_min = cost(sd) <= 0.99 * report.adrc_envelope->J_min;
  report.ordering = o;
  return report;
}

std::string format_table(const SummaryReport& report) {
  std::ostringstream out;
  char line[256];
  out << "scenario " << report.scenario << "\n";
  std::snprintf(line, sizeof line, "%-10s %-11s %12s %12s %10s %10s %9s %6s %8s %8s\n", "run",
                "kind", "final J", "final |x|", "max |x|", "max |u|", "switches", "ties",
                "failures", "wall s");
  out << line;
  for (const auto& r : report.runs) {
    std::snprintf(line, sizeof line, "%-10s %-11s %12.6g %12.4g %10.4g %10.4g %9zu %6zu %8zu %8.3f%s\n",
                  r.name.c_str(), r.kind.c_str(), r.final_J, r.final_x_norm, r.max_x_norm,
                  r.max_u_norm, r.switches, r.ties, r.sdre_failures, r.wall_seconds,
                  r.diverged ? "  DIVERGED" : r.chattering ? "  CHATTERING" : "");
    out << line;
  }
  if (report.adrc_envelope) {
    std::snprintf(line, sizeof line, "ADRC family J envelope: [%.6g, %.6g]\n",
                  report.adrc_envelope->J_min, report.adrc_envelope->J_max);
    out << line;
  }
  if (report.ordering) {
    const Ordering& o = *report.ordering;
    out << "J(sdre) <= J(switching): " << (o.sdre_le_switching ? "yes" : "no") << "\n"
        << "J(switching) <= max ADRC J: " << (o.switching_le_adrc_max ? "yes" : "no") << "\n"
        << "J(sdre) <= 0.99 min ADRC J: " << (o.sdre_below_adrc_min ? "yes" : "no") << "\n";
  }
  for (const auto& r : report.runs) {
    if (r.diverged) out << "run " << r.name << ": " << r.error << "\n";
    for (const auto& w : r.warnings) out << "run " << r.name << ": warning: " << w << "\n";
  }
  return out.str();
}

std::string format_key_values(const SummaryReport& report) {
  std::ostringstream out;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "scenario=" << report.scenario << "\n";
  double gamma = 0.0;
  for (const auto& r : report.runs) {
    const std::string p = "run." + r.name + ".";
    out << p << "kind=" << r.kind << "\n"
        << p << "diverged=" << (r.diverged ? 1 : 0) << "\n"
        << p << "steps=" << r.steps << "\n"
        << p << "final_t=" << num(r.final_t) << "\n"
        << p << "final_x_norm=" << num(r.final_x_norm) << "\n"
        << p << "final_J=" << num(r.final_J) << "\n"
        << p << "max_x_norm=" << num(r.max_x_norm) << "\n"
        << p << "max_u_norm=" << num(r.max_u_norm) << "\n"
        << p << "switches=" << r.switches << "\n"
        << p << "chattering=" << (r.chattering ? 1 : 0) << "\n"
        << p << "ties=" << r.ties << "\n"
        << p << "sdre_failures=" << r.sdre_failures << "\n"
        << p << "wall_seconds=" << num(r.wall_seconds) << "\n"
        << p << "csv=" << r.csv.string() << "\n";
    gamma = std::max(gamma, r.max_x_norm + r.max_u_norm);
  }
  out << "gamma=" << num(gamma) << "\n";
  if (report.adrc_envelope) {
    out << "adrc.J_min=" << num(report.adrc_envelope->J_min) << "\n"
        << "adrc.J_max=" << num(report.adrc_envelope->J_max) << "\n";
  }
  if (report.ordering) {
    out << "ordering.sdre_le_switching=" << report.ordering->sdre_le_switching << "\n"
        << "ordering.switching_le_adrc_max=" << report.ordering->switching_le_adrc_max << "\n"
        << "ordering.sdre_below_adrc_min=" << report.ordering->sdre_below_adrc_min << "\n";
  }
  return out.str();
}

}  // namespace sdre_eso::study
