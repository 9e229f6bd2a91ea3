#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpara/fracop.hpp"
#include "fpara/pushforward.hpp"
#include "fpara/scenarios.hpp"
#include "fpara/tau_quadrature.hpp"

namespace fpara::cli {

/// Bad configuration or command line. Messages name the file, line and field when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Diffeomorphism family for the pushforward command. An empty kind selects
/// the command default for the scenario dimension.
struct DiffeoSpec {
  std::string kind;
  Point center{0.0, 0.0};
  double radius = 0.6;
  double eps = 0.3;

  DiffeoMap build(int n) const;
};

struct Tolerance {
  double value = 0.0;
  std::string source;
};

struct RunConfig {
  Scenario scenario;
  /// Orders to run; a single entry when s comes from --s or the config.
  std::vector<double> orders{0.25, 0.5, 0.75};
  TauQuadrature quad;
  /// Symbol-route padding; unset means route_padding(n).
  bool pad_set = false;
  SymbolPadding pad;
  DiffeoSpec diffeo;
  double tau1 = 0.25, tau2 = 0.5;
  std::map<std::string, Tolerance> tolerances;
  std::string config_path;

  double tol(const std::string& key) const;
  const std::string& tol_source(const std::string& key) const;
  SymbolPadding symbol_padding() const { return pad_set ? pad : route_padding(scenario.grid.n); }
};

/// default1d, default2d, default2d-identity, decay1d, operator, pushforward1d.
Scenario named_scenario(const std::string& name);
std::vector<std::string> scenario_names();

/// Every tolerance key with its default value and where that value comes from.
std::map<std::string, Tolerance> default_tolerances();

/// Reads an INI file with sections [grid], [sigma], [masks], [fractional],
/// [checks] and [diffeo] on top of `cfg`.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Sanity checks that need the whole configuration; throws ConfigError.
void validate(const RunConfig& cfg);

}  // namespace fpara::cli
