// Command-line front end: run scenarios, compare controllers, validate
// scenario files.
//
// Exit codes: 0 success, 1 configuration error, 2 divergence, 3 solver
// failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sdre_eso/checks.hpp"
#include "sdre_eso/errors.hpp"
#include "sdre_eso/scenario.hpp"
#include "sdre_eso/sim.hpp"
#include "sdre_eso/study.hpp"

namespace {

using namespace sdre_eso;

constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitSolver = 3;

struct Options {
  std::string scenario_path;
  std::string out_dir;
  std::string mode;
  std::size_t seed_sweep = 0;
};

scenario::Scenario load(const Options& opt) {
  scenario::Scenario s = scenario::parse_scenario(opt.scenario_path);
  if (opt.mode == "switching") s.controller.mode = controller::ControlMode::Switching;
  if (opt.mode == "sdre") s.controller.mode = controller::ControlMode::SdreEsoOnly;
  if (opt.mode == "adrc") s.controller.mode = controller::ControlMode::AdrcOnly;
  return s;
}

std::filesystem::path output_dir(const Options& opt, const scenario::Scenario& s) {
  return std::filesystem::path(opt.out_dir.empty() ? s.output.dir : opt.out_dir);
}

int report(const study::SummaryReport& r, const std::filesystem::path& dir) {
  const std::string text = study::format_table(r) + "\n" + study::format_key_values(r);
  std::cout << text;
  std::ofstream(dir / (r.scenario + "_summary.txt"), std::ios::binary) << text;
  return r.any_diverged() ? kExitDivergence : 0;
}

int cmd_run(const Options& opt) {
  const auto s = load(opt);
  const auto dir = output_dir(opt, s);
  return report(study::run_scenario(s, dir), dir);
}

int cmd_compare(const Options& opt) {
  const auto s = load(opt);
  const auto dir = output_dir(opt, s);
  return report(study::compare(s, dir), dir);
}

int cmd_validate(const Options& opt) {
  int status = 0;
  if (!opt.scenario_path.empty()) {
    const auto s = load(opt);
    std::cout << "scenario " << s.name << ": ok\n";
  }
  if (opt.seed_sweep > 0) {
    const auto tally = checks::run_property_sweep(opt.seed_sweep);
    std::cout << "riccati: " << tally.care_passed << "/" << tally.care_total << " passed\n"
              << "sdc identity: " << tally.sdc_passed << "/" << tally.sdc_total << " passed\n";
    for (const auto& f : tally.failures) std::cout << "  " << f << "\n";
    if (!tally.ok()) status = kExitSolver;
  }
  return status;
}

int cmd_list_plants() {
  std::cout << "pendulum          k=2 n=1  keys: g, l, b\n"
            << "chain_integrator  any k, n  keys: k, n\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SDRE+ESO / ADRC switching controller studies"};
  app.require_subcommand(1);
  Options opt;

  auto add_scenario = [&opt](CLI::App* sub, bool required) {
    auto* flag = sub->add_option("--scenario", opt.scenario_path, "Scenario file");
    if (required) flag->required();
    flag->check(CLI::ExistingFile);
  };
  auto add_run_flags = [&opt](CLI::App* sub) {
    sub->add_option("--out", opt.out_dir, "Output directory (overrides [output] dir)");
    sub->add_option("--mode", opt.mode, "Controller mode override")
        ->check(CLI::IsMember({"switching", "sdre", "adrc"}));
  };

  auto* run = app.add_subcommand("run", "Run the scenario and write CSV trajectories");
  add_scenario(run, true);
  add_run_flags(run);
  auto* cmp = app.add_subcommand("compare", "Compare switching, SDRE+ESO and the ADRC family");
  add_scenario(cmp, true);
  add_run_flags(cmp);
  auto* val = app.add_subcommand("validate", "Parse a scenario and run randomized property checks");
  add_scenario(val, false);
  val->add_option("--mode", opt.mode, "Controller mode override")
      ->check(CLI::IsMember({"switching", "sdre", "adrc"}));
  val->add_option("--seed-sweep", opt.seed_sweep, "Number of random seeds for property checks");
  auto* list = app.add_subcommand("list-plants", "List available plant models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(opt);
    if (cmp->parsed()) return cmd_compare(opt);
    if (val->parsed()) return cmd_validate(opt);
    if (list->parsed()) return cmd_list_plants();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const VariantError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sim::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
