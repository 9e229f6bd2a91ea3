#include "output.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "fpara/diagnostics.hpp"

namespace fpara::cli {

ordered_json grid_json(const GridSpec& g) {
  const Grid grid(g);
  ordered_json j;
  j["n"] = g.n;
  j["L"] = g.L;
  j["Nx"] = g.Nx;
  j["T"] = g.T;
  j["Nt"] = g.Nt;
  j["Ny"] = g.Ny;
  j["Ymax"] = g.y_max();
  j["grade"] = g.grade;
  j["dx"] = grid.dx();
  j["dt"] = grid.dt();
  return j;
}

ordered_json quadrature_json(const TauQuadrature& q) {
  ordered_json j;
  j["panel_nodes"] = q.panel_nodes;
  j["first_panel_nodes"] = q.first_panel_nodes;
  j["log_panel_nodes"] = q.log_panel_nodes;
  return j;
}

ordered_json padding_json(const SymbolPadding& p) {
  ordered_json j;
  j["time"] = p.time;
  j["space"] = p.space;
  j["continuation"] = p.continuation == SymbolContinuation::zero ? "zero" : "linear_taper";
  return j;
}

ordered_json scenario_json(const RunConfig& cfg) {
  const Scenario& sc = cfg.scenario;
  const int n = sc.grid.n;
  auto box = [n](const Box& b) {
    ordered_json j = ordered_json::array();
    for (int a = 0; a < n; ++a) j.push_back({b.lo[a], b.hi[a]});
    return j;
  };
  ordered_json j;
  j["name"] = sc.name;
  j["grid"] = grid_json(sc.grid);
  ordered_json sg;
  sg["kind"] = sc.sigma.kind;
  if (sc.sigma.kind != "identity") {
    sg["matrix"] = {{sc.sigma.matrix(0, 0), sc.sigma.matrix(0, 1)}, {sc.sigma.matrix(1, 0), sc.sigma.matrix(1, 1)}};
    if (sc.sigma.kind == "bump") {
      sg["center"] = {sc.sigma.center[0], sc.sigma.center[1]};
      sg["radius"] = sc.sigma.radius;
    }
  }
  j["sigma"] = sg;
  j["omega"] = box(sc.omega);
  j["w"] = box(sc.w);
  j["orders"] = cfg.orders;
  j["quadrature"] = quadrature_json(cfg.quad);
  j["symbol_padding"] = padding_json(cfg.symbol_padding());
  j["config"] = cfg.config_path;
  return j;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

const char* symbol(Compare c) {
  switch (c) {
    case Compare::le:
      return "<=";
    case Compare::ge:
      return ">=";
    case Compare::lt:
      return "<";
  }
  return "?";
}

bool holds(double v, Compare c, double b) {
  switch (c) {
    case Compare::le:
      return v <= b;
    case Compare::ge:
      return v >= b;
    case Compare::lt:
      return v < b;
  }
  return false;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

Recorder::Recorder(std::filesystem::path dir, const RunConfig& cfg) : dir_(std::move(dir)), cfg_(cfg) {
  std::filesystem::create_directories(dir_);
}

ordered_json Recorder::entry(const std::string& name, double value, const GridSpec& grid, ordered_json extra) const {
  ordered_json j;
  j["name"] = name;
  j["value"] = std::isfinite(value) ? ordered_json(value) : ordered_json(nullptr);
  j["grid"] = grid_json(grid);
  j["quadrature"] = quadrature_json(cfg_.quad);
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

bool Recorder::check(const std::string& name, double value, Compare cmp, const std::string& tol_key,
                     const GridSpec& grid, ordered_json extra) {
  return check_fixed(name, value, cmp, cfg_.tol(tol_key), cfg_.tol_source(tol_key), grid,
                     [&] {
                       ordered_json e;
                       e["tolerance_key"] = tol_key;
                       for (auto& [k, v] : extra.items()) e[k] = v;
                       return e;
                     }());
}

bool Recorder::check_fixed(const std::string& name, double value, Compare cmp, double bound, const std::string& source,
                           const GridSpec& grid, ordered_json extra) {
  const bool ok = std::isfinite(value) && holds(value, cmp, bound);
  ordered_json e;
  e["comparison"] = symbol(cmp);
  e["tolerance"] = bound;
  e["tolerance_source"] = source;
  e["passed"] = ok;
  for (auto& [k, v] : extra.items()) e[k] = v;
  checks_.push_back(entry(name, value, grid, std::move(e)));
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << sci(value) << ' ' << symbol(cmp) << ' ' << sci(bound)
            << '\n';
  if (!ok) failed_.push_back(name);
  return ok;
}

void Recorder::measure(const std::string& name, double value, const GridSpec& grid, ordered_json extra) {
  measurements_.push_back(entry(name, value, grid, std::move(extra)));
}

void Recorder::artifact(const std::string& file, const std::string& kind) {
  ordered_json j;
  j["file"] = file;
  j["kind"] = kind;
  artifacts_.push_back(j);
}

void Recorder::write(const std::string& command, const ordered_json& run_info) {
  ordered_json root;
  root["command"] = command;
  root["status"] = passed() ? "pass" : "fail";
  root["failed_checks"] = failed_;
  root["created"] = utc_now();
  root["run"] = run_info;
  root["scenario"] = scenario_json(cfg_);
  root["checks"] = checks_;
  root["measurements"] = measurements_;
  root["artifacts"] = artifacts_;
  std::ofstream out(dir_ / "results.json");
  out << root.dump(2) << '\n';
  if (!out) throw NumericalFailure("cannot write " + (dir_ / "results.json").string());
}

void CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::logic_error("csv row width differs from header");
  rows_.push_back(std::move(cells));
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  if (!out) throw NumericalFailure("cannot write " + path.string());
}

namespace {

constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else if (c == '&')
      o += "&amp;";
    else
      o += c;
  }
  return o;
}

std::string tick(double v, bool log) {
  std::ostringstream os;
  if (log)
    os << "1e" << static_cast<int>(std::lround(v));
  else
    os << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

void line_plot(const std::filesystem::path& path, const std::string& title, const std::string& xlabel,
               const std::string& ylabel, const std::vector<Series>& series, bool logx, bool logy) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  std::vector<std::vector<std::pair<double, double>>> pts;
  for (const Series& s : series) {
    auto& p = pts.emplace_back();
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double x = s.x[i], y = s.y[i];
      if ((logx && !(x > 0)) || (logy && !(y > 0)) || !std::isfinite(x) || !std::isfinite(y)) continue;
      if (logx) x = std::log10(x);
      if (logy) y = std::log10(y);
      p.emplace_back(x, y);
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1;
  if (y0 > y1) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto X = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto Y = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ofstream out(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    out << "<text x=\"" << X(xv) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">" << tick(xv, logx)
        << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << tick(yv, logy)
        << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << esc(xlabel)
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + ph / 2 << ")\">" << esc(ylabel) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = kColors[s % std::size(kColors)];
    if (series[s].line && pts[s].size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
      for (auto [x, y] : pts[s]) out << X(x) << ',' << Y(y) << ' ';
      out << "\"/>\n";
    }
    for (auto [x, y] : pts[s]) out << "<circle cx=\"" << X(x) << "\" cy=\"" << Y(y) << "\" r=\"2.5\" fill=\"" << c << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(s);
    out << "<rect x=\"" << kW - kRight + 12 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << c
        << "\"/>\n";
    out << "<text x=\"" << kW - kRight + 28 << "\" y=\"" << ly << "\">" << esc(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw NumericalFailure("cannot write " + path.string());
}

void heatmap(const std::filesystem::path& path, const std::string& title, const Eigen::MatrixXd& full, bool log) {
  // Blocks of at most 160 x 160 cells; each cell shows its largest |entry|
  // (log scale) or its mean.
  const Eigen::Index fr = (full.rows() + 159) / 160, fc = (full.cols() + 159) / 160;
  const Eigen::Index R = (full.rows() + fr - 1) / fr, C = (full.cols() + fc - 1) / fc;
  Eigen::MatrixXd m(R, C);
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index j = 0; j < C; ++j) {
      const auto blk = full.block(i * fr, j * fc, std::min(fr, full.rows() - i * fr), std::min(fc, full.cols() - j * fc));
      m(i, j) = log ? blk.cwiseAbs().maxCoeff() : blk.mean();
    }
  Eigen::MatrixXd v = m;
  if (log) v = m.cwiseAbs().unaryExpr([](double a) { return a > 0 ? std::log10(a) : -300.0; });
  double hi = v.maxCoeff(), lo = log ? std::max(v.minCoeff(), hi - 12.0) : v.minCoeff();
  if (hi - lo < 1e-300) lo = hi - 1.0;
  const double size = 400.0, cw = size / static_cast<double>(C), ch = size / static_cast<double>(R);
  std::ofstream out(path);
  out << std::setprecision(5);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 140 << "\" height=\"" << size + 60
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (size + 140) / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title)
      << "</text>\n<g transform=\"translate(20,40)\" shape-rendering=\"crispEdges\">\n";
  auto color = [](double z) {
    // Dark blue to yellow.
    const int r = static_cast<int>(255 * std::clamp(1.8 * z - 0.5, 0.0, 1.0));
    const int g = static_cast<int>(255 * std::clamp(z, 0.0, 1.0));
    const int b = static_cast<int>(255 * std::clamp(0.6 - 0.6 * z + 0.4 * (1 - std::abs(2 * z - 1)), 0.0, 1.0));
    std::ostringstream os;
    os << "rgb(" << r << ',' << g << ',' << b << ')';
    return os.str();
  };
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index j = 0; j < C; ++j) {
      const double z = std::clamp((v(i, j) - lo) / (hi - lo), 0.0, 1.0);
      out << "<rect x=\"" << j * cw << "\" y=\"" << i * ch << "\" width=\"" << cw << "\" height=\"" << ch
          << "\" fill=\"" << color(z) << "\"/>\n";
    }
  out << "</g>\n";
  for (int k = 0; k <= 4; ++k) {
    const double z = k / 4.0, yv = 40 + size * (1 - z);
    out << "<rect x=\"" << size + 40 << "\" y=\"" << yv - size / 8 << "\" width=\"16\" height=\"" << size / 8
        << "\" fill=\"" << color(z) << "\"/>\n";
    out << "<text x=\"" << size + 62 << "\" y=\"" << yv << "\">" << (log ? "1e" : "") << std::setprecision(3)
        << lo + z * (hi - lo) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw NumericalFailure("cannot write " + path.string());
}

}  // namespace fpara::cli
