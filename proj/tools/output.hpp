#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "config.hpp"

namespace fpara::cli {

using ordered_json = nlohmann::ordered_json;

ordered_json grid_json(const GridSpec& g);
ordered_json quadrature_json(const TauQuadrature& q);
ordered_json padding_json(const SymbolPadding& p);
ordered_json scenario_json(const RunConfig& cfg);

enum class Compare { le, ge, lt };

/// Collects checks and measurements of one run and writes results.json.
/// Every entry carries the grid and quadrature that produced it.
class Recorder {
 public:
  Recorder(std::filesystem::path dir, const RunConfig& cfg);

  /// Records value against cfg tolerance `tol_key` and prints one line.
  bool check(const std::string& name, double value, Compare cmp, const std::string& tol_key, const GridSpec& grid,
             ordered_json extra = ordered_json::object());
  /// A check against a fixed bound that is part of the method (no tolerance key).
  bool check_fixed(const std::string& name, double value, Compare cmp, double bound, const std::string& source,
                   const GridSpec& grid, ordered_json extra = ordered_json::object());
  void measure(const std::string& name, double value, const GridSpec& grid, ordered_json extra = ordered_json::object());
  void artifact(const std::string& file, const std::string& kind);

  bool passed() const { return failed_.empty(); }
  const std::vector<std::string>& failed() const { return failed_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }

  /// results.json with a fixed key order; `created` is the only time-dependent field.
  void write(const std::string& command, const ordered_json& run_info);

 private:
  ordered_json entry(const std::string& name, double value, const GridSpec& grid, ordered_json extra) const;

  std::filesystem::path dir_;
  const RunConfig& cfg_;
  ordered_json checks_ = ordered_json::array();
  ordered_json measurements_ = ordered_json::array();
  ordered_json artifacts_ = ordered_json::array();
  std::vector<std::string> failed_;
};

/// Comma-separated table with full double precision.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void row(std::vector<std::string> cells);
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double v);

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool line = true;
};

/// Line/marker plot in SVG. Non-positive values are dropped on log axes.
void line_plot(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
               const std::string& ylabel, const std::vector<Series>& series, bool logx, bool logy);

/// Heatmap of a matrix in SVG, row 0 at the top; `log` plots log10 |entry|.
void heatmap(const std::filesystem::path& path, const std::string& title, const Eigen::MatrixXd& m, bool log);

}  // namespace fpara::cli
