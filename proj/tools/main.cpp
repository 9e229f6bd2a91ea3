#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "commands.hpp"
#include "fpara/diagnostics.hpp"

using namespace fpara;
using namespace fpara::cli;

namespace {

struct Args {
  std::string config, out, scenario;
  double s = -1.0;
  RunOptions opt;
  std::vector<std::string> runs;
};

// Exit codes: 0 all checks pass, 1 a check failed or the numerics broke down,
// 2 bad configuration or arguments.
int execute(const std::string& command, const Args& a) {
  const std::string out = a.out.empty() ? "fpara-" + command : a.out;
  if (command == "report") return run_report(a.runs, out) ? 0 : 1;

  RunConfig cfg;
  const std::string scen = a.scenario.empty() ? default_scenario_for(command) : a.scenario;
  cfg.scenario = named_scenario(scen);
  cfg.tolerances = default_tolerances();
  if (!a.config.empty()) apply_config_file(cfg, a.config);
  if (a.s >= 0.0) {
    cfg.scenario.s = a.s;
    cfg.orders = {a.s};
  }
  if (a.opt.refine < 1) throw ConfigError("--refine must be at least 1");
  validate(cfg);

  std::filesystem::create_directories(out);
  Recorder rec(out, cfg);
  const auto start = std::chrono::steady_clock::now();
  try {
    run_command(command, cfg, a.opt, rec);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  ordered_json run;
  run["refine"] = a.opt.refine;
  run["seed"] = a.opt.seed;
  run["plots"] = a.opt.plots;
  run["config"] = a.config;
  rec.write(command, run);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << command << ": " << (rec.passed() ? "pass" : "fail") << " in " << secs << " s, results in " << out
            << "/results.json\n";
  for (const auto& f : rec.failed()) std::cout << "  failed: " << f << '\n';
  return rec.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks for fractional parabolic operators and their extensions"};
  app.require_subcommand(1);
  Args a;
  std::string scen_help = "scenario preset:";
  for (const auto& s : scenario_names()) scen_help += " " + s;

  for (const std::string& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--out", a.out, "output directory (default fpara-<command>)");
    if (name == "report") {
      sub->description("aggregate results.json of earlier runs");
      sub->add_option("runs", a.runs, "run directories")->required();
      continue;
    }
    sub->add_option("--config", a.config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--s", a.s, "fractional order in (0, 1)");
    sub->add_option("--refine", a.opt.refine, "number of nested grids, each refined by 2");
    sub->add_option("--seed", a.opt.seed, "seed for randomized checks");
    sub->add_option("--emit-plots", a.opt.plots, "write SVG plots");
    sub->add_option("--scenario", a.scenario, scen_help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return execute(command, a);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  }
}
