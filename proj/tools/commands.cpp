#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fpara/archive.hpp"
#include "fpara/diagnostics.hpp"
#include "fpara/dnmap.hpp"
#include "fpara/extension.hpp"
#include "fpara/fracop.hpp"
#include "fpara/heat_kernel.hpp"
#include "fpara/pushforward.hpp"
#include "fpara/reduction.hpp"

namespace fpara::cli {

namespace {

GridSpec level_grid(const GridSpec& g, int level) { return level == 0 ? g : g.refined(1 << level); }

// Variable conductivities and the lattice kernel use a dense eigenbasis of the
// spatial generator; beyond this many nodes it no longer fits the memory budget.
constexpr std::size_t kDenseNodeLimit = 4096;

void require_dense_size(const Grid& g, bool dense, const std::string& what) {
  if (dense && g.spatial_size() > kDenseNodeLimit)
    throw ConfigError(what + ": " + std::to_string(g.spatial_size()) +
                      " spatial nodes exceed the dense eigenbasis limit of " + std::to_string(kDenseNodeLimit) +
                      "; lower Nx or --refine");
}

std::string label(const std::string& what, double s, int level) {
  std::ostringstream os;
  os << what << " [s=" << s << ", level " << level << ']';
  return os.str();
}

std::string label(const std::string& what, int level) { return what + " [level " + std::to_string(level) + ']'; }

ordered_json with_s(double s) {
  ordered_json j;
  j["s"] = s;
  return j;
}

// Lattice L2 norm restricted to Omega_T.
double omega_norm(const SpaceTimeField& a, const DomainMasks& m) {
  const Grid& g = a.grid();
  double e = 0.0;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i : m.omega_nodes()) e += a(k, i) * a(k, i);
  return std::sqrt(e * g.dt() * g.cell_volume());
}

void order_checks(Recorder& rec, const std::string& what, const std::vector<double>& errs, const GridSpec& base,
                  const std::string& tol_key, double s) {
  for (std::size_t l = 1; l < errs.size(); ++l) {
    ordered_json e = with_s(s);
    e["coarse"] = errs[l - 1];
    e["fine"] = errs[l];
    rec.check(label("order of " + what, s, static_cast<int>(l)), convergence_order(errs[l - 1], errs[l]), Compare::ge,
              tol_key, level_grid(base, static_cast<int>(l)), e);
  }
}

void decreasing_checks(Recorder& rec, const std::string& what, const std::vector<double>& v, const GridSpec& base) {
  for (std::size_t l = 1; l < v.size(); ++l)
    rec.check_fixed(label(what + " ratio fine/coarse", static_cast<int>(l)), v[l] / v[l - 1], Compare::lt, 1.0,
                    "must decrease under refinement", level_grid(base, static_cast<int>(l)));
}

// --- op-check -------------------------------------------------------------

void op_check(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  CsvTable table({"level", "Nx", "Nt", "dx", "s", "pair", "relative_l2"});
  std::map<std::string, std::vector<double>> curves;
  std::map<std::string, double> curve_s;
  std::vector<double> dx;
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const ConductivityField sigma = sc.sigma.build(g);
    require_dense_size(g, !sigma.is_constant(), label("grid", l));
    const HeatKernel K = make_kernel(sigma);
    const SpaceTimeField u = gaussian_datum(g);
    dx.push_back(g.dx());
    for (double s : cfg.orders) {
      const SpaceTimeField B = apply_balakrishnan(u, s, K, cfg.quad);
      const SpaceTimeField P = apply_extension_trace(u, s, TraceMethod::pde, K, cfg.quad).value;
      const SpaceTimeField E = apply_extension_trace(u, s, TraceMethod::kernel, K, cfg.quad).value;
      std::vector<std::pair<std::string, double>> pairs;
      if (sigma.is_identity()) {
        const SpaceTimeField S = apply_symbol(u, s, cfg.symbol_padding());
        pairs = {{"balakrishnan-symbol", relative_l2(S, B, B)},
                 {"balakrishnan-pde", relative_l2(P, B, B)},
                 {"symbol-pde", relative_l2(P, S, B)},
                 {"balakrishnan-kernel", relative_l2(E, B, B)}};
      } else {
        // The symbol route needs sigma = Id.
        pairs = {{"balakrishnan-pde", relative_l2(P, B, B)}, {"balakrishnan-kernel", relative_l2(E, B, B)}};
      }
      for (const auto& [name, err] : pairs) {
        ordered_json e = with_s(s);
        e["pair"] = name;
        e["relative_to"] = "balakrishnan";
        if (name.find("symbol") != std::string::npos) e["symbol_padding"] = padding_json(cfg.symbol_padding());
        rec.check(label("route " + name, s, l), err, Compare::le, "route_tol", gs, e);
        table.row({std::to_string(l), std::to_string(gs.Nx), std::to_string(gs.Nt), num(g.dx()), num(s), name, num(err)});
        std::ostringstream key;
        key << name << " s=" << s;
        curves[key.str()].push_back(err);
        curve_s[key.str()] = s;
      }
    }
  }
  for (const auto& [key, errs] : curves) order_checks(rec, "route " + key.substr(0, key.find(' ')), errs, sc.grid, "route_min_order", curve_s[key]);
  table.write(rec.file("op_check.csv"));
  rec.artifact("op_check.csv", "table");
  if (opt.plots) {
    std::vector<Series> series;
    for (const auto& [key, errs] : curves) series.push_back({key, dx, errs});
    line_plot(rec.file("convergence.svg"), "Pairwise route discrepancy", "dx", "relative L2", series, true, true);
    rec.artifact("convergence.svg", "plot");
  }
}

// --- extension-check --------------------------------------------------------

void extension_check(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  CsvTable table({"level", "s", "plane", "y", "kernel_vs_pde"});
  std::vector<Series> series;
  std::map<double, std::vector<double>> res_kernel, res_pde;
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const ConductivityField sigma = sc.sigma.build(g);
    require_dense_size(g, !sigma.is_constant(), label("grid", l));
    const HeatKernel K = make_kernel(sigma);
    const SpaceTimeField u = gaussian_datum(g);
    const double T = gs.T, ymax = gs.y_max();
    // Later data: a bump supported in t > T/4.
    const SpaceTimeField late = u + space_time_bump(g, 0.5 * T, 0.25 * T, Point{0.0, 0.0}, 0.5 * gs.L);
    for (double s : cfg.orders) {
      const ExtensionField a = extend_kernel(u, s, K, cfg.quad), b = extend_pde(u, s, K);
      Series sr{label("s", s, l), {}, {}};
      double worst = 0.0;
      for (int j = 1; j < a.planes(); ++j) {
        if (g.y(j) > 0.5 * ymax) break;
        const double d = relative_l2(a.plane_field(j), b.plane_field(j), u);
        worst = std::max(worst, d);
        table.row({std::to_string(l), num(s), std::to_string(j), num(g.y(j)), num(d)});
        sr.x.push_back(g.y(j));
        sr.y.push_back(d);
      }
      series.push_back(sr);
      ordered_json e = with_s(s);
      e["y_range"] = {0.0, 0.5 * ymax};
      rec.check(label("kernel vs PDE extension, max over planes", s, l), worst, Compare::le, "extension_tol", gs, e);
      const double ra = extension_residual(a, K, 0.01, 0.5 * ymax), rb = extension_residual(b, K, 0.01, 0.5 * ymax);
      e["y_range"] = {0.01, 0.5 * ymax};
      rec.check(label("extension residual, kernel route", s, l), ra, Compare::le, "residual_tol", gs, e);
      rec.check(label("extension residual, PDE route", s, l), rb, Compare::le, "residual_tol", gs, e);
      res_kernel[s].push_back(ra);
      res_pde[s].push_back(rb);

      const ExtensionField a2 = extend_kernel(late, s, K, cfg.quad), b2 = extend_pde(late, s, K);
      double before = 0.0;
      for (int j = 0; j < a.planes(); ++j)
        for (int k = 0; k < g.nt() && g.t(k) <= 0.25 * T; ++k)
          for (std::size_t i = 0; i < g.spatial_size(); ++i)
            before = std::max({before, std::abs(a.at(j, k, i) - a2.at(j, k, i)), std::abs(b.at(j, k, i) - b2.at(j, k, i))});
      rec.check_fixed(label("extension change before later data", s, l), before, Compare::le, 0.0,
                      "exact: both solvers are causal on the lattice", gs, with_s(s));

      if (sigma.is_identity() && g.spatial_size() <= kDenseNodeLimit) {
        PdeOptions be;
        be.scheme = TimeScheme::backward_euler;
        const ExtensionField m = extend_pde(u, s, HeatKernel::discrete(sigma), be);
        double umin = 0.0, umax = 0.0, lo = 0.0, hi = 0.0;
        for (double v : u.values()) umin = std::min(umin, v), umax = std::max(umax, v);
        for (int j = 0; j < m.planes(); ++j)
          for (double v : m.plane(j)) lo = std::min(lo, v), hi = std::max(hi, v);
        ordered_json me = with_s(s);
        me["scheme"] = "backward Euler, lattice generator";
        rec.check(label("maximum principle excess", s, l), std::max({umin - lo, hi - umax, 0.0}), Compare::le,
                  "max_principle_slack", gs, me);
      }
    }
  }
  for (const auto& [s, v] : res_kernel) order_checks(rec, "kernel-route residual", v, sc.grid, "residual_min_order", s);
  for (const auto& [s, v] : res_pde) order_checks(rec, "PDE-route residual", v, sc.grid, "residual_min_order", s);
  table.write(rec.file("extension_check.csv"));
  rec.artifact("extension_check.csv", "table");
  if (opt.plots) {
    line_plot(rec.file("extension_planes.svg"), "Kernel vs PDE extension per plane", "y", "relative L2", series, true,
              true);
    rec.artifact("extension_planes.svg", "plot");
  }
}

// --- duality-check ----------------------------------------------------------

void duality_check(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  CsvTable table({"level", "s", "conjugate_residual", "round_trip"});
  std::map<double, std::vector<double>> res;
  std::vector<double> dx;
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const ConductivityField sigma = sc.sigma.build(g);
    require_dense_size(g, !sigma.is_constant(), label("grid", l));
    const HeatKernel K = make_kernel(sigma);
    const SpaceTimeField u = gaussian_datum(g);
    dx.push_back(g.dx());
    for (double s : cfg.orders) {
      const ExtensionField u1 = extend_kernel(u, 1.0 - s, K, cfg.quad);
      const ExtensionField u2 = conjugate_transform(u1, s);
      const double r = extension_residual(u2, K, 0.01, 0.5 * gs.y_max());
      const double trip = duality_round_trip(u1, u2);
      ordered_json e = with_s(s);
      e["y_range"] = {0.01, 0.5 * gs.y_max()};
      rec.check(label("conjugate equation residual", s, l), r, Compare::le, "residual_tol", gs, e);
      rec.check(label("duality round trip", s, l), trip, Compare::le, "round_trip_tol", gs, with_s(s));
      table.row({std::to_string(l), num(s), num(r), num(trip)});
      res[s].push_back(r);
    }
  }
  for (const auto& [s, v] : res) order_checks(rec, "conjugate residual", v, sc.grid, "residual_min_order", s);
  table.write(rec.file("duality_check.csv"));
  rec.artifact("duality_check.csv", "table");
  if (opt.plots) {
    std::vector<Series> series;
    for (const auto& [s, v] : res) {
      std::ostringstream os;
      os << "s=" << s;
      series.push_back({os.str(), dx, v});
    }
    line_plot(rec.file("duality_convergence.svg"), "Conjugate equation residual", "dx", "relative residual", series,
              true, true);
    rec.artifact("duality_convergence.svg", "plot");
  }
}

// --- reduction --------------------------------------------------------------

void reduction(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  const double s = sc.s;
  CsvTable table({"level", "test", "tc", "rt", "c0", "c1", "r", "key_residual", "control_residual"});
  std::vector<double> keys;
  std::vector<Series> series;
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const DomainMasks masks(g, sc.omega, sc.w);
    const ConductivityField sigma = sc.sigma.build(g);
    require_dense_size(g, !sigma.is_constant(), label("grid", l));
    const HeatKernel K = make_kernel(sigma);
    const NonlocalSolver solver(K, s, masks, cfg.quad);
    const CauchyPair pair = transfer_map(solver, exterior_bumps(g, sc.w)[0], cfg.quad);
    const KeyEquationResult key = check_key_equation(pair.v, sigma, masks);
    const KeyEquationResult ctl = check_key_equation(pair.u, sigma, masks);
    const auto fam = key_test_family(g, masks);
    Series sk{label("v", l), {}, {}}, sr{label("raw u", l), {}, {}};
    for (std::size_t m = 0; m < fam.size(); ++m) {
      table.row({std::to_string(l), std::to_string(m), num(fam[m].tc), num(fam[m].rt), num(fam[m].center[0]),
                 num(fam[m].center[1]), num(fam[m].r), num(key.residuals[m]), num(ctl.residuals[m])});
      sk.x.push_back(static_cast<double>(m));
      sk.y.push_back(key.residuals[m]);
      sr.x.push_back(static_cast<double>(m));
      sr.y.push_back(ctl.residuals[m]);
    }
    series.push_back(sk);
    series.push_back(sr);
    ordered_json e = with_s(s);
    e["test_family_version"] = kKeyTestFamilyVersion;
    e["datum"] = "exterior bump 0";
    rec.check(label("key equation residual of v", s, l), key.max_residual, Compare::le, "key_tol", gs, e);
    rec.check(label("control/key residual ratio", s, l), ctl.max_residual / key.max_residual, Compare::ge,
              "control_ratio", gs, e);
    keys.push_back(key.max_residual);

    // Outline identity in Omega_T, for the extension of the nonlocal solution.
    const SpaceTimeField outline = outline_integral(extend_kernel(pair.u, s, K, cfg.quad));
    const SpaceTimeField ref = (1.0 / frac_constants(s).d) * apply_balakrishnan(pair.u, s, K, cfg.quad);
    // Inside Omega_T the reference itself vanishes (u solves the nonlocal equation
    // there), so the Omega part is reported against the full-lattice norm.
    rec.check(label("outline identity", s, l), relative_l2(outline, ref, ref), Compare::le, "outline_tol", gs,
              with_s(s));
    rec.measure(label("outline integral in Omega / ||reference||", s, l), omega_norm(outline, masks) / ref.norm(), gs,
                with_s(s));

    if (sigma.is_identity() && gs.n == 1) {
      const SymbolPadding pad = cfg.pad_set ? cfg.pad : SymbolPadding{16, 4, SymbolContinuation::linear_taper};
      const OneMinusSResult r = check_one_minus_s_relation(pair.v, pair.u, s, sigma, pad);
      ordered_json oe = with_s(s);
      oe["symbol_padding"] = padding_json(pad);
      oe["with_plus_sign"] = r.literal;
      rec.check(label("u-v relation ||H^(1-s) v - d_(1-s) u||/||u||", s, l), r.discrepancy, Compare::le,
                "one_minus_s_tol", gs, oe);
    }
  }
  decreasing_checks(rec, "key residual", keys, sc.grid);
  table.write(rec.file("reduction.csv"));
  rec.artifact("reduction.csv", "table");
  if (opt.plots) {
    for (Series& sr : series) sr.line = false;
    line_plot(rec.file("key_residuals.svg"), "Weak heat residual per test function", "test function", "residual",
              series, false, true);
    rec.artifact("key_residuals.svg", "plot");
  }
}

// --- DN maps ------------------------------------------------------------------

template <class Solver>
void dn_common(Recorder& rec, const Solver& solver, const DNMatrix& D, const DNMatrix& R, const GridSpec& gs, int l,
               const RunOptions& opt, CsvTable& table) {
  const double causal = D.causal_violation();
  const double order_diff = (D.entries - R.entries).cwiseAbs().maxCoeff();
  const double repro = dn_reproduction_error(solver, D, opt.seed);
  ordered_json e;
  e["rows"] = D.entries.rows();
  e["cols"] = D.entries.cols();
  rec.check(label("DN causal triangularity", l), causal, Compare::le, "dn_causal_tol", gs, e);
  rec.check_fixed(label("DN assembly order dependence", l), order_diff, Compare::le, 0.0,
                  "exact: columns are independent solves", gs, e);
  e["seed"] = opt.seed;
  rec.check(label("DN reproduction on random data", l), repro, Compare::le, "dn_reproduction_tol", gs, e);
  table.row({std::to_string(l), std::to_string(D.entries.rows()), std::to_string(D.entries.cols()), num(causal),
             num(order_diff), num(repro)});
}

void dn_local_cmd(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  CsvTable table({"level", "rows", "cols", "causal_violation", "order_dependence", "reproduction_error"});
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const DomainMasks masks(g, sc.omega, sc.w);
    const LocalSolver solver(sc.sigma.build(g), masks);
    const DNMatrix D = assemble_local_dn(solver), R = assemble_local_dn(solver, AssemblyOrder::reverse);
    dn_common(rec, solver, D, R, gs, l, opt, table);
    const std::string h5 = "dn_local_level" + std::to_string(l) + ".h5";
    write_dn_matrix(rec.file(h5).string(), D);
    rec.artifact(h5, "hdf5");
    if (opt.plots && l == 0) {
      heatmap(rec.file("dn_local.svg"), "Local DN matrix, log10 |entry|", D.entries, true);
      rec.artifact("dn_local.svg", "plot");
    }
  }
  table.write(rec.file("dn_local.csv"));
  rec.artifact("dn_local.csv", "table");
}

void dn_nonlocal_cmd(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  const double s = sc.s;
  CsvTable table({"level", "rows", "cols", "causal_violation", "order_dependence", "reproduction_error"});
  std::vector<double> energy;
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const DomainMasks masks(g, sc.omega, sc.w);
    const ConductivityField sigma = sc.sigma.build(g);
    require_dense_size(g, !sigma.is_constant(), label("grid", l));
    const NonlocalSolver solver(make_kernel(sigma), s, masks, cfg.quad);
    const DNMatrix D = assemble_nonlocal_dn(solver), R = assemble_nonlocal_dn(solver, AssemblyOrder::reverse);
    dn_common(rec, solver, D, R, gs, l, opt, table);
    const std::string h5 = "dn_nonlocal_level" + std::to_string(l) + ".h5";
    write_dn_matrix(rec.file(h5).string(), D);
    rec.artifact(h5, "hdf5");
    if (opt.plots && l == 0) {
      heatmap(rec.file("dn_nonlocal.svg"), "Nonlocal DN matrix, log10 |entry|", D.entries, true);
      rec.artifact("dn_nonlocal.svg", "plot");
    }

    // Exterior data changed after t0 must leave the solution up to t0 untouched.
    const double T = gs.T, t0 = 0.1 * T;
    const SpaceTimeField f = exterior_bumps(g, sc.w)[0];
    Point c{0.0, 0.0};
    double width = 1e300;
    for (int d = 0; d < gs.n; ++d) {
      c[d] = 0.5 * (sc.w.lo[d] + sc.w.hi[d]);
      width = std::min(width, sc.w.hi[d] - sc.w.lo[d]);
    }
    const SpaceTimeField u1 = solver.solve(f), u2 = solver.solve(f + space_time_bump(g, t0 + 0.35 * T, 0.3 * T, c, 0.4 * width));
    double before = 0.0, after = 0.0;
    for (int k = 0; k < g.nt(); ++k)
      for (std::size_t i = 0; i < g.spatial_size(); ++i) {
        double& slot = g.t(k) <= t0 ? before : after;
        slot = std::max(slot, std::abs(u1(k, i) - u2(k, i)));
      }
    ordered_json e = with_s(s);
    e["t0"] = t0;
    e["change_after_t0"] = after / u1.max_abs();
    rec.check(label("causality: change for t <= t0", s, l), before / u1.max_abs(), Compare::le, "causality_tol", gs, e);
    for (const SpaceTimeField& b : exterior_bumps(g, sc.w)) solver.solve(b);
    rec.measure(label("energy ratio max ||u|| / ||f||", s, l), solver.energy_ratio(), gs, with_s(s));
    energy.push_back(solver.energy_ratio());
  }
  for (std::size_t l = 1; l < energy.size(); ++l)
    rec.check(label("energy ratio drift under refinement", static_cast<int>(l)), std::abs(energy[l] / energy[l - 1] - 1.0),
              Compare::le, "energy_drift_tol", level_grid(sc.grid, static_cast<int>(l)), with_s(s));
  table.write(rec.file("dn_nonlocal.csv"));
  rec.artifact("dn_nonlocal.csv", "table");
}

// --- transfer ---------------------------------------------------------------

void transfer_cmd(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  const double s = sc.s;
  CsvTable table({"level", "bump", "consistency"});
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const DomainMasks masks(g, sc.omega, sc.w);
    const ConductivityField sigma = sc.sigma.build(g);
    require_dense_size(g, !sigma.is_constant(), label("grid", l));
    const NonlocalSolver solver(make_kernel(sigma), s, masks, cfg.quad);
    const LocalSolver local(sigma, masks);
    const auto bumps = exterior_bumps(g, sc.w);
    for (std::size_t m = 0; m < bumps.size(); ++m) {
      const CauchyPair pair = transfer_map(solver, bumps[m], cfg.quad);
      const double c = transfer_consistency(pair, local);
      ordered_json e = with_s(s);
      e["bump"] = m;
      rec.check(label("Cauchy pair reproduced by the local solver, bump " + std::to_string(m), s, l), c, Compare::le,
                "transfer_tol", gs, e);
      table.row({std::to_string(l), std::to_string(m), num(c)});
      if (l == 0) {
        const std::string csv = "cauchy_pair_" + std::to_string(m) + ".csv";
        write_cauchy_pair_csv(rec.file(csv).string(), pair, masks);
        rec.artifact(csv, "table");
        if (opt.plots && m == 0) {
          Series tr{"trace", {}, {}}, fl{"flux", {}, {}};
          for (int k = 0; k < g.nt(); ++k) {
            tr.x.push_back(g.t(k));
            fl.x.push_back(g.t(k));
            tr.y.push_back(pair.trace(k, 0));
            fl.y.push_back(pair.flux(k, 0));
          }
          line_plot(rec.file("cauchy_pair_0.svg"), "Cauchy pair at the first boundary node", "t", "value", {tr, fl},
                    false, false);
          rec.artifact("cauchy_pair_0.svg", "plot");
        }
      }
    }
  }
  table.write(rec.file("transfer.csv"));
  rec.artifact("transfer.csv", "table");
}

// --- pushforward ------------------------------------------------------------

void pushforward_cmd(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  const int n = sc.grid.n;
  const DiffeoMap phi = cfg.diffeo.kind.empty()
                            ? (n == 1 ? DiffeoMap::bump_stretch_1d(0.0, 0.6, 0.3)
                                      : DiffeoMap::radial_bump_2d(Point{0.1, -0.1}, 0.7, 0.3))
                            : cfg.diffeo.build(n);
  const DiffeoMap moving = n == 1 ? DiffeoMap::bump_stretch_1d(1.0, 0.8, 0.5)
                                  : DiffeoMap::radial_bump_2d(Point{1.0, 0.0}, 1.2, 0.6);
  CsvTable table({"level", "discrepancy", "boundary_displacement", "control_discrepancy", "control_displacement"});
  std::vector<double> disc;
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const DomainMasks masks(g, sc.omega, sc.w);
    const ConductivityField sigma = sc.sigma.build(g);
    require_dense_size(g, !sigma.is_constant(), label("grid", l));
    phi.validate(g);
    const InvarianceResult r = check_cauchy_invariance(sigma, phi, masks);
    const InvarianceResult c = check_cauchy_invariance(sigma, moving, masks, true);
    ordered_json e;
    e["map"] = phi.name();
    rec.check(label("DN invariance under pushforward", l), r.discrepancy, Compare::le, "pushforward_tol", gs, e);
    ordered_json ce;
    ce["map"] = moving.name();
    ce["boundary_displacement"] = c.boundary_displacement;
    rec.check(label("boundary-moving control", l), c.discrepancy, Compare::ge, "control_floor", gs, ce);
    disc.push_back(r.discrepancy);
    table.row({std::to_string(l), num(r.discrepancy), num(r.boundary_displacement), num(c.discrepancy),
               num(c.boundary_displacement)});
    if (opt.plots && l == 0) {
      heatmap(rec.file("dn_pushforward_difference.svg"), "DN(pushed) - DN, log10 |entry|",
              r.dn_pushed.entries - r.dn.entries, true);
      rec.artifact("dn_pushforward_difference.svg", "plot");
    }
  }
  decreasing_checks(rec, "DN invariance discrepancy", disc, sc.grid);
  table.write(rec.file("pushforward.csv"));
  rec.artifact("pushforward.csv", "table");
}

// --- decay ------------------------------------------------------------------

void decay_cmd(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  const double s = sc.s;
  const int n = sc.grid.n;
  if (opt.refine > 1) std::cout << "note: decay runs on the scenario grid only; --refine is ignored\n";
  const Grid g(sc.grid);
  const SpaceTimeField u = decay_datum(g);
  const ConductivityField sigma = sc.sigma.build(g);
  require_dense_size(g, !sigma.is_constant(), "grid");
  const ExtensionField ut = extend_kernel(u, s, make_kernel(sigma), cfg.quad);
  const auto [lo, hi] = decay_window(u);
  struct Fit {
    std::string name;
    DecayProfile p;
    double target;
  };
  const std::vector<Fit> fits{
      {"u~ L1t Linfx", decay_profile(ut, DecayNorm::l1t_linfx), -static_cast<double>(n)},
      {"grad u~ L1t Linfx", decay_profile(ut, DecayNorm::gradient_l1t_linfx), -static_cast<double>(n) - 1.0},
      {"w L1t Linfx", decay_profile(compute_w(ut), DecayNorm::l1t_linfx, lo, hi), 2.0 - 2.0 * s - n}};
  CsvTable table({"norm", "y", "value"});
  std::vector<Series> series;
  for (const Fit& f : fits) {
    ordered_json e = with_s(s);
    e["slope"] = f.p.slope;
    e["target"] = f.target;
    e["window"] = {f.p.y_lo, f.p.y_hi};
    e["points"] = f.p.points.size();
    rec.check("decay slope deviation, " + f.name, std::abs(f.p.slope - f.target), Compare::le, "decay_band", sc.grid, e);
    Series pts{f.name, {}, {}}, line{f.name + " fit", {}, {}};
    pts.line = false;
    for (auto [y, v] : f.p.points) {
      table.row({f.name, num(y), num(v)});
      pts.x.push_back(y);
      pts.y.push_back(v);
    }
    if (!f.p.points.empty()) {
      // Least-squares line through the points in log-log coordinates.
      double mx = 0.0, my = 0.0;
      for (auto [y, v] : f.p.points) mx += std::log(y), my += std::log(v);
      mx /= static_cast<double>(f.p.points.size());
      my /= static_cast<double>(f.p.points.size());
      for (double y : {f.p.points.front().first, f.p.points.back().first}) {
        line.x.push_back(y);
        line.y.push_back(std::exp(my + f.p.slope * (std::log(y) - mx)));
      }
    }
    series.push_back(pts);
    series.push_back(line);
  }
  table.write(rec.file("decay.csv"));
  rec.artifact("decay.csv", "table");
  if (opt.plots) {
    line_plot(rec.file("decay.svg"), "Decay in y", "y", "norm", series, true, true);
    rec.artifact("decay.svg", "plot");
  }
}

// --- kernel-check -------------------------------------------------------------

void kernel_check(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Scenario& sc = cfg.scenario;
  CsvTable table({"level", "l1_vs_exact", "mass", "symmetry", "chapman", "c_lower", "C_lower", "c_upper", "C_upper",
                  "violations", "grad_violations"});
  for (int l = 0; l < opt.refine; ++l) {
    const GridSpec gs = level_grid(sc.grid, l);
    const Grid g(gs);
    const ConductivityField sigma = sc.sigma.build(g);
    require_dense_size(g, true, label("grid", l));
    const KernelHygiene h = kernel_hygiene(sigma, cfg.tau1, cfg.tau2);
    ordered_json e;
    e["tau"] = {cfg.tau1, cfg.tau2, cfg.tau1 + cfg.tau2};
    if (sigma.is_constant()) rec.check(label("kernel L1 vs Gaussian", l), h.l1_vs_exact, Compare::le, "kernel_l1_tol", gs, e);
    rec.check(label("kernel mass defect", l), h.mass, Compare::le, "kernel_mass_tol", gs, e);
    rec.check(label("kernel asymmetry", l), h.symmetry, Compare::le, "kernel_symmetry_tol", gs, e);
    rec.check(label("Chapman-Kolmogorov defect", l), h.chapman, Compare::le, "kernel_chapman_tol", gs, e);
    const std::vector<double> taus{cfg.tau1, cfg.tau2, cfg.tau1 + cfg.tau2};
    const HeatKernel K = build_discrete(sigma, taus);
    const GaussianBoundFit fit = check_gaussian_bounds(K);
    ordered_json fe = e;
    fe["entries"] = fit.entries;
    fe["c_lower"] = fit.c_lower;
    fe["C_lower"] = fit.C_lower;
    fe["c_upper"] = fit.c_upper;
    fe["C_upper"] = fit.C_upper;
    fe["grad_c"] = fit.grad_c;
    fe["grad_C"] = fit.grad_C;
    rec.check_fixed(label("Gaussian sandwich violations", l), static_cast<double>(fit.violations), Compare::le, 0.0,
                    "exact count over the fitted entries", gs, fe);
    rec.check_fixed(label("gradient bound violations", l), static_cast<double>(fit.grad_violations), Compare::le, 0.0,
                    "exact count over the fitted entries", gs, fe);
    table.row({std::to_string(l), num(h.l1_vs_exact), num(h.mass), num(h.symmetry), num(h.chapman), num(fit.c_lower),
               num(fit.C_lower), num(fit.c_upper), num(fit.C_upper), std::to_string(fit.violations),
               std::to_string(fit.grad_violations)});
    if (l == 0) {
      // Full tables only while they stay small.
      if (g.spatial_size() <= 1024) {
        write_kernel_tables(rec.file("kernel_tables.h5").string(), K);
        rec.artifact("kernel_tables.h5", "hdf5");
      }
      if (opt.plots) {
        const Eigen::MatrixXd& P = K.tables()[0];
        Eigen::MatrixXd img;
        if (gs.n == 1) {
          img = P;
        } else {
          // p(., z, tau1) for z the node nearest the origin.
          const std::size_t z = g.flatten({g.x_index(0.0), g.x_index(0.0)});
          img.resize(g.nx(), g.nx());
          for (std::size_t i = 0; i < g.spatial_size(); ++i) {
            const auto mi = g.unflatten(i);
            img(mi[0], mi[1]) = P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(z));
          }
        }
        heatmap(rec.file("kernel_heatmap.svg"), "Discrete heat kernel at tau1", img, false);
        rec.artifact("kernel_heatmap.svg", "plot");
      }
    }
  }
  table.write(rec.file("kernel_check.csv"));
  rec.artifact("kernel_check.csv", "table");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"op-check", "extension-check", "duality-check", "reduction",
                                              "dn-local", "dn-nonlocal",     "transfer",      "pushforward",
                                              "decay",    "kernel-check",    "report"};
  return names;
}

std::string default_scenario_for(const std::string& command) {
  if (command == "op-check" || command == "extension-check" || command == "duality-check" ||
      command == "kernel-check")
    return "operator";
  if (command == "decay") return "decay1d";
  if (command == "pushforward") return "pushforward1d";
  return "default1d";
}

void run_command(const std::string& command, const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  // Fail before any work when the finest level cannot be built.
  const int finest = command == "decay" ? 0 : opt.refine - 1;
  const bool dense = command == "kernel-check" || cfg.scenario.sigma.kind == "bump";
  require_dense_size(Grid(level_grid(cfg.scenario.grid, finest)), dense, label("grid", finest));
  if (command == "op-check") return op_check(cfg, opt, rec);
  if (command == "extension-check") return extension_check(cfg, opt, rec);
  if (command == "duality-check") return duality_check(cfg, opt, rec);
  if (command == "reduction") return reduction(cfg, opt, rec);
  if (command == "dn-local") return dn_local_cmd(cfg, opt, rec);
  if (command == "dn-nonlocal") return dn_nonlocal_cmd(cfg, opt, rec);
  if (command == "transfer") return transfer_cmd(cfg, opt, rec);
  if (command == "pushforward") return pushforward_cmd(cfg, opt, rec);
  if (command == "decay") return decay_cmd(cfg, opt, rec);
  if (command == "kernel-check") return kernel_check(cfg, opt, rec);
  throw ConfigError("unknown command '" + command + "'");
}

bool run_report(const std::vector<std::string>& runs, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  CsvTable table({"run", "command", "scenario", "check", "value", "comparison", "tolerance", "passed"});
  ordered_json list = ordered_json::array();
  std::vector<std::string> failed;
  for (const std::string& dir : runs) {
    const std::filesystem::path p = std::filesystem::path(dir) / "results.json";
    std::ifstream in(p);
    if (!in) throw ConfigError("report: cannot read " + p.string());
    ordered_json r;
    try {
      r = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("report: " + p.string() + ": " + e.what());
    }
    if (!r.contains("command") || !r.contains("checks")) throw ConfigError("report: " + p.string() + " is not a run result");
    const std::string scen = r.contains("scenario") ? r["scenario"].value("name", "") : "";
    std::size_t nfail = 0;
    for (const auto& c : r["checks"]) {
      const bool ok = c.value("passed", false);
      if (!ok) {
        ++nfail;
        failed.push_back(dir + ": " + c.value("name", "?"));
      }
      const auto& v = c["value"];
      table.row({dir, r["command"].get<std::string>(), scen, "\"" + c.value("name", "") + "\"",
                 v.is_number() ? num(v.get<double>()) : "nan", c.value("comparison", ""),
                 num(c.value("tolerance", 0.0)), ok ? "1" : "0"});
    }
    ordered_json e;
    e["run"] = dir;
    e["command"] = r["command"];
    e["scenario"] = scen;
    e["status"] = r.value("status", "unknown");
    e["checks"] = r["checks"].size();
    e["failed"] = nfail;
    list.push_back(e);
  }
  table.write(out / "summary.csv");
  ordered_json root;
  root["command"] = "report";
  root["status"] = failed.empty() ? "pass" : "fail";
  root["failed_checks"] = failed;
  root["runs"] = list;
  std::ofstream o(out / "results.json");
  o << root.dump(2) << '\n';
  for (const auto& f : failed) std::cout << "FAIL " << f << '\n';
  std::cout << runs.size() << " runs, " << failed.size() << " failed checks\n";
  return failed.empty();
}

}  // namespace fpara::cli
