#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "fpara/diagnostics.hpp"

namespace fpara::cli {

namespace {

using json = nlohmann::json;
namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

// Line of `key` inside `[section]`, or 0.
int find_line(const std::string& path, const std::string& section, const std::string& key) {
  std::ifstream in(path);
  std::string line, current;
  for (int no = 1; std::getline(in, line); ++no) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      if (key.empty() && current == section) return no;
      continue;
    }
    const auto eq = t.find('=');
    if (current == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return no;
  }
  return 0;
}

// Field-level reader that turns every failure into a located ConfigError.
class Reader {
 public:
  Reader(std::string path, const pt::ptree& tree) : path_(std::move(path)), tree_(tree) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    std::ostringstream os;
    os << path_;
    if (const int line = find_line(path_, section, key)) os << ':' << line;
    os << ": [" << section << "]";
    if (!key.empty()) os << ' ' << key;
    os << ": " << what;
    throw ConfigError(os.str());
  }

  const std::string* raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return nullptr;
    const auto v = sec->get_child_optional(key);
    return v ? &v->data() : nullptr;
  }

  json parse(const std::string& section, const std::string& key, const std::string& text) const {
    try {
      return json::parse(text);
    } catch (const json::exception&) {
      fail(section, key, "cannot parse '" + text + "'");
    }
  }

  bool number(const std::string& section, const std::string& key, double& out) const {
    const std::string* r = raw(section, key);
    if (!r) return false;
    const json j = parse(section, key, *r);
    if (!j.is_number()) fail(section, key, "expected a number, got '" + *r + "'");
    out = j.get<double>();
    return true;
  }

  bool integer(const std::string& section, const std::string& key, int& out) const {
    const std::string* r = raw(section, key);
    if (!r) return false;
    const json j = parse(section, key, *r);
    if (!j.is_number_integer()) fail(section, key, "expected an integer, got '" + *r + "'");
    out = j.get<int>();
    return true;
  }

  bool word(const std::string& section, const std::string& key, std::string& out) const {
    const std::string* r = raw(section, key);
    if (!r) return false;
    out = trim(*r);
    return true;
  }

  bool numbers(const std::string& section, const std::string& key, std::vector<double>& out) const {
    const std::string* r = raw(section, key);
    if (!r) return false;
    const json j = parse(section, key, *r);
    out.clear();
    if (j.is_number()) {
      out.push_back(j.get<double>());
      return true;
    }
    if (!j.is_array()) fail(section, key, "expected a number or a list of numbers");
    for (const json& e : j) {
      if (!e.is_number()) fail(section, key, "expected a list of numbers");
      out.push_back(e.get<double>());
    }
    return true;
  }

  // [[a, b], [c, d]], [[a]] or a plain number (1 x 1).
  bool matrix(const std::string& section, const std::string& key, Mat2& out) const {
    const std::string* r = raw(section, key);
    if (!r) return false;
    const json j = parse(section, key, *r);
    out = Mat2::Zero();
    if (j.is_number()) {
      out(0, 0) = j.get<double>();
      return true;
    }
    if (!j.is_array() || j.empty() || j.size() > 2) fail(section, key, "expected [[a]] or [[a, b], [c, d]]");
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_array() || j[i].size() != j.size()) fail(section, key, "matrix rows must be square");
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[i][k].is_number()) fail(section, key, "matrix entries must be numbers");
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
      }
    }
    return true;
  }

  // Per-axis intervals [[lo, hi], ...].
  bool box(const std::string& section, const std::string& key, Box& out) const {
    const std::string* r = raw(section, key);
    if (!r) return false;
    const json j = parse(section, key, *r);
    if (!j.is_array() || j.empty() || j.size() > 2) fail(section, key, "expected [[lo, hi]] or [[lo, hi], [lo, hi]]");
    out = Box{};
    for (std::size_t a = 0; a < j.size(); ++a) {
      if (!j[a].is_array() || j[a].size() != 2 || !j[a][0].is_number() || !j[a][1].is_number())
        fail(section, key, "each axis needs [lo, hi]");
      out.lo[a] = j[a][0].get<double>();
      out.hi[a] = j[a][1].get<double>();
      if (!(out.lo[a] < out.hi[a])) fail(section, key, "lo must be below hi");
    }
    return true;
  }

  void require_known(const std::map<std::string, std::set<std::string>>& allowed) const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) fail(section, "", "key outside any section");
      const auto it = allowed.find(section);
      if (it == allowed.end()) fail(section, "", "unknown section");
      for (const auto& [key, v] : body)
        if (!it->second.count(key)) fail(section, key, "unknown key");
    }
  }

 private:
  std::string path_;
  const pt::ptree& tree_;
};

}  // namespace

DiffeoMap DiffeoSpec::build(int n) const {
  std::string k = kind;
  if (k.empty()) k = n == 1 ? "bump_stretch_1d" : "radial_bump_2d";
  if (k == "identity") return DiffeoMap::identity(n);
  if (k == "bump_stretch_1d") {
    if (n != 1) throw ConfigError("[diffeo] kind: bump_stretch_1d needs a one-dimensional grid");
    return DiffeoMap::bump_stretch_1d(center[0], radius, eps);
  }
  if (k == "radial_bump_2d") {
    if (n != 2) throw ConfigError("[diffeo] kind: radial_bump_2d needs a two-dimensional grid");
    return DiffeoMap::radial_bump_2d(center, radius, eps);
  }
  throw ConfigError("[diffeo] kind: unknown family '" + k + "'");
}

double RunConfig::tol(const std::string& key) const {
  const auto it = tolerances.find(key);
  if (it == tolerances.end()) throw std::logic_error("no tolerance '" + key + "'");
  return it->second.value;
}

const std::string& RunConfig::tol_source(const std::string& key) const {
  const auto it = tolerances.find(key);
  if (it == tolerances.end()) throw std::logic_error("no tolerance '" + key + "'");
  return it->second.source;
}

Scenario named_scenario(const std::string& name) {
  if (name == "default1d") return default_scenario_1d();
  if (name == "default2d") return default_scenario_2d();
  if (name == "default2d-identity") return default_scenario_2d_identity();
  if (name == "decay1d") return default_decay_scenario();
  if (name == "operator") {
    Scenario sc = default_scenario_1d();
    sc.name = "operator";
    sc.grid = operator_grid();
    return sc;
  }
  if (name == "pushforward1d") {
    // sigma varies across the right face of Omega, so moving that face is visible.
    Scenario sc = default_scenario_1d();
    sc.name = "pushforward1d";
    sc.sigma.kind = "bump";
    sc.sigma.matrix(0, 0) = 3.0;
    sc.sigma.center = {0.2, 0.0};
    sc.sigma.radius = 1.0;
    return sc;
  }
  std::ostringstream os;
  os << "unknown scenario '" << name << "' (known:";
  for (const auto& n : scenario_names()) os << ' ' << n;
  os << ')';
  throw ConfigError(os.str());
}

std::vector<std::string> scenario_names() {
  return {"default1d", "default2d", "default2d-identity", "decay1d", "operator", "pushforward1d"};
}

std::map<std::string, Tolerance> default_tolerances() {
  return {
      {"route_tol", {1e-2, "default, acceptance criterion C1"}},
      {"route_min_order", {1.0, "default, acceptance criterion C1"}},
      {"extension_tol", {2e-2, "default, kernel vs PDE extension per plane; same scale as the C5 residual"}},
      {"max_principle_slack", {1e-8, "default, maximum principle of the PDE extension"}},
      {"residual_tol", {2e-2, "default, acceptance criterion C5"}},
      {"residual_min_order", {1.0, "default, acceptance criterion C5"}},
      {"round_trip_tol", {2e-2, "default, acceptance criterion C5"}},
      {"key_tol", {5e-2, "default, acceptance criterion C6"}},
      {"control_ratio", {10.0, "default, acceptance criterion C6"}},
      {"one_minus_s_tol", {5e-2, "default, acceptance criterion C7"}},
      {"outline_tol", {5e-2, "default, outline identity against the Balakrishnan route"}},
      {"transfer_tol", {5e-2, "default, acceptance criterion C8"}},
      {"causality_tol", {1e-10, "default, acceptance criterion C9"}},
      {"dn_causal_tol", {1e-12, "default, causal triangularity of DN matrices (roundoff)"}},
      {"dn_reproduction_tol", {1e-10, "default, DN matrices against operator application on random data"}},
      {"energy_drift_tol", {0.2, "default, relative change of the energy ratio under refinement"}},
      {"pushforward_tol", {5e-2, "default, acceptance criterion C10"}},
      {"control_floor", {0.1, "default, acceptance criterion C10 (boundary-moving control stays O(1))"}},
      {"decay_band", {0.2, "default, acceptance criterion C11"}},
      {"kernel_l1_tol", {1e-2, "default, acceptance criterion C12"}},
      {"kernel_mass_tol", {1e-4, "default, acceptance criterion C12"}},
      {"kernel_symmetry_tol", {1e-6, "default, acceptance criterion C12"}},
      {"kernel_chapman_tol", {1e-3, "default, acceptance criterion C12"}},
  };
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream os;
    os << path;
    if (e.line() > 0) os << ':' << e.line();
    os << ": " << e.message();
    throw ConfigError(os.str());
  }
  cfg.config_path = path;
  const Reader rd(path, tree);

  std::set<std::string> check_keys{"tau1", "tau2"};
  for (const auto& [k, v] : cfg.tolerances) check_keys.insert(k);
  rd.require_known({{"grid", {"n", "L", "Nx", "T", "Nt", "Ny", "Ymax", "grade"}},
                    {"sigma", {"kind", "matrix", "center", "radius"}},
                    {"masks", {"omega", "w"}},
                    {"fractional",
                     {"s", "panel_nodes", "first_panel_nodes", "log_panel_nodes", "symbol_pad_time", "symbol_pad_space",
                      "continuation"}},
                    {"checks", check_keys},
                    {"diffeo", {"kind", "center", "radius", "eps"}}});

  GridSpec& g = cfg.scenario.grid;
  rd.integer("grid", "n", g.n);
  rd.number("grid", "L", g.L);
  rd.integer("grid", "Nx", g.Nx);
  rd.number("grid", "T", g.T);
  rd.integer("grid", "Nt", g.Nt);
  rd.integer("grid", "Ny", g.Ny);
  rd.number("grid", "Ymax", g.Ymax);
  rd.number("grid", "grade", g.grade);
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    rd.fail("grid", "", e.what());
  }

  SigmaSpec& sg = cfg.scenario.sigma;
  if (rd.word("sigma", "kind", sg.kind) && sg.kind != "identity" && sg.kind != "constant" && sg.kind != "bump")
    rd.fail("sigma", "kind", "expected identity, constant or bump");
  rd.matrix("sigma", "matrix", sg.matrix);
  std::vector<double> v;
  if (rd.numbers("sigma", "center", v)) {
    if (v.size() != static_cast<std::size_t>(g.n)) rd.fail("sigma", "center", "needs one entry per axis");
    for (std::size_t a = 0; a < v.size(); ++a) sg.center[a] = v[a];
  }
  if (rd.number("sigma", "radius", sg.radius) && !(sg.radius > 0.0)) rd.fail("sigma", "radius", "must be positive");
  if (sg.kind == "constant" && rd.raw("sigma", "matrix") == nullptr && cfg.scenario.sigma.matrix.isZero())
    rd.fail("sigma", "matrix", "the constant family needs a matrix");

  rd.box("masks", "omega", cfg.scenario.omega);
  rd.box("masks", "w", cfg.scenario.w);

  double s = 0.0;
  if (rd.number("fractional", "s", s)) {
    if (!(s > 0.0 && s < 1.0)) rd.fail("fractional", "s", "must lie in (0, 1)");
    cfg.scenario.s = s;
    cfg.orders = {s};
  }
  rd.integer("fractional", "panel_nodes", cfg.quad.panel_nodes);
  rd.integer("fractional", "first_panel_nodes", cfg.quad.first_panel_nodes);
  rd.integer("fractional", "log_panel_nodes", cfg.quad.log_panel_nodes);
  for (const char* k : {"panel_nodes", "first_panel_nodes", "log_panel_nodes"}) {
    int q = 0;
    if (rd.integer("fractional", k, q) && q < 1) rd.fail("fractional", k, "must be at least 1");
  }
  if (rd.raw("fractional", "symbol_pad_time") || rd.raw("fractional", "symbol_pad_space") ||
      rd.raw("fractional", "continuation")) {
    cfg.pad = cfg.symbol_padding();
    cfg.pad_set = true;
    rd.integer("fractional", "symbol_pad_time", cfg.pad.time);
    rd.integer("fractional", "symbol_pad_space", cfg.pad.space);
    if (cfg.pad.time < 1 || cfg.pad.space < 1) rd.fail("fractional", "symbol_pad_time", "padding factors must be >= 1");
    std::string cont;
    if (rd.word("fractional", "continuation", cont)) {
      if (cont == "zero")
        cfg.pad.continuation = SymbolContinuation::zero;
      else if (cont == "linear_taper")
        cfg.pad.continuation = SymbolContinuation::linear_taper;
      else
        rd.fail("fractional", "continuation", "expected zero or linear_taper");
    }
  }

  for (auto& [key, t] : cfg.tolerances) {
    double x = 0.0;
    if (rd.number("checks", key, x)) {
      if (!(x >= 0.0)) rd.fail("checks", key, "must be non-negative");
      const int line = find_line(path, "checks", key);
      t = {x, "config " + path + (line ? ":" + std::to_string(line) : std::string()) + " [checks] " + key};
    }
  }
  if (rd.number("checks", "tau1", cfg.tau1) && !(cfg.tau1 > 0.0)) rd.fail("checks", "tau1", "must be positive");
  if (rd.number("checks", "tau2", cfg.tau2) && !(cfg.tau2 > 0.0)) rd.fail("checks", "tau2", "must be positive");

  if (rd.word("diffeo", "kind", cfg.diffeo.kind) && cfg.diffeo.kind != "identity" &&
      cfg.diffeo.kind != "bump_stretch_1d" && cfg.diffeo.kind != "radial_bump_2d")
    rd.fail("diffeo", "kind", "expected identity, bump_stretch_1d or radial_bump_2d");
  if (rd.numbers("diffeo", "center", v)) {
    if (v.size() != static_cast<std::size_t>(g.n)) rd.fail("diffeo", "center", "needs one entry per axis");
    for (std::size_t a = 0; a < v.size(); ++a) cfg.diffeo.center[a] = v[a];
  }
  rd.number("diffeo", "radius", cfg.diffeo.radius);
  rd.number("diffeo", "eps", cfg.diffeo.eps);
}

void validate(const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  try {
    sc.grid.validate();
    const Grid g(sc.grid);
    [[maybe_unused]] const DomainMasks masks(g, sc.omega, sc.w);
    const ConductivityField sigma = sc.sigma.build(g);
    sigma.require_ellipticity(1e-8);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("scenario '") + sc.name + "': " + e.what());
  } catch (const NumericalFailure& e) {
    throw ConfigError(std::string("scenario '") + sc.name + "': " + e.what());
  }
  for (double s : cfg.orders)
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("s must lie in (0, 1)");
}

}  // namespace fpara::cli
