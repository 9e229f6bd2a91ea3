#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace fpara::cli {

struct RunOptions {
  int refine = 1;  ///< number of nested grids, each refined by 2
  std::uint64_t seed = 20240601;
  bool plots = true;
};

/// Subcommand names, in help order.
const std::vector<std::string>& command_names();
/// Scenario a command runs when neither --scenario nor a config names one.
std::string default_scenario_for(const std::string& command);

/// Runs one scenario command and records its checks.
void run_command(const std::string& command, const RunConfig& cfg, const RunOptions& opt, Recorder& rec);

/// Aggregates results.json of earlier runs into summary.csv and results.json in
/// `out`. Returns true iff every run passed.
bool run_report(const std::vector<std::string>& runs, const std::filesystem::path& out);

}  // namespace fpara::cli
