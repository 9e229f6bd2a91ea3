#include "fpara/scenarios.hpp"

#include <cmath>

#include "fpara/diagnostics.hpp"
#include "fpara/heat_kernel.hpp"

namespace fpara {

ConductivityField SigmaSpec::build(const Grid& grid) const {
  if (kind == "identity") return ConductivityField::identity(grid);
  if (kind == "constant") return ConductivityField::constant(grid, matrix);
  if (kind == "bump") return ConductivityField::bump_perturbation(grid, center, radius, matrix);
  throw InvalidArgument("unknown sigma family '" + kind + "'");
}

Scenario default_scenario_1d() {
  Scenario sc;
  sc.name = "default1d";
  sc.grid.n = 1;
  sc.grid.L = 8.0;
  sc.grid.Nx = 128;
  sc.grid.Nt = 64;
  sc.grid.Ny = 64;
  sc.omega = Box{{-1.0, 0.0}, {1.0, 0.0}};
  sc.w = Box{{1.5, 0.0}, {2.5, 0.0}};
  return sc;
}

Scenario default_scenario_2d() {
  Scenario sc;
  sc.name = "default2d";
  sc.grid.n = 2;
  sc.grid.L = 3.0;
  sc.grid.Nx = 48;
  sc.grid.Nt = 48;
  sc.grid.Ny = 64;
  sc.omega = Box{{-1.0, -1.0}, {1.0, 1.0}};
  sc.w = Box{{1.5, -0.5}, {2.5, 0.5}};
  sc.sigma.kind = "bump";
  sc.sigma.matrix << 0.6, 0.3, 0.3, 0.2;
  sc.sigma.center = {0.0, 0.0};
  sc.sigma.radius = 0.9;
  return sc;
}

Scenario default_scenario_2d_identity() {
  Scenario sc = default_scenario_2d();
  sc.name = "default2d-identity";
  sc.sigma = SigmaSpec{};
  return sc;
}

Scenario default_decay_scenario() {
  Scenario sc = default_scenario_1d();
  sc.name = "decay1d";
  sc.grid.T = 32.0;
  sc.grid.Nt = 512;
  sc.grid.Ny = 96;
  return sc;
}

SpaceTimeField decay_datum(const Grid& grid) {
  const double T = grid.spec().T;
  return space_time_bump(grid, -15.0 * T / 16.0, T / 32.0, Point{0.0, 0.0}, 0.25);
}

GridSpec operator_grid() {
  GridSpec gs;
  gs.n = 1;
  gs.L = 4.0;
  gs.Nx = 64;
  gs.Nt = 64;
  gs.Ny = 64;
  return gs;
}

SpaceTimeField gaussian_datum(const Grid& grid) {
  return SpaceTimeField::sample(grid, [n = grid.dim()](double t, Point x) {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += (x[a] / 0.8) * (x[a] / 0.8);
    const double a = (t + 0.2) / 0.2;
    return std::exp(-a * a - r2);
  });
}

SpaceTimeField space_time_bump(const Grid& grid, double tc, double rt, Point center, double r) {
  return SpaceTimeField::sample(grid, [=, n = grid.dim()](double t, Point x) {
    const double a = (t - tc) / rt;
    if (std::abs(a) >= 1.0) return 0.0;
    double v = smooth_bump(a);
    for (int d = 0; d < n; ++d) {
      const double b = (x[d] - center[d]) / r;
      if (std::abs(b) >= 1.0) return 0.0;
      v *= smooth_bump(b);
    }
    return v;
  });
}

std::vector<SpaceTimeField> exterior_bumps(const Grid& grid, const Box& w) {
  const int n = grid.dim();
  const double T = grid.spec().T;
  double width = 1e300;
  for (int d = 0; d < n; ++d) width = std::min(width, w.hi[d] - w.lo[d]);
  // Centres at 1/2, 2/5 and 3/5 of W along each axis; times early, middle, late.
  const double fr[3] = {0.5, 0.4, 0.6};
  const double tc[3] = {-0.3 * T, -0.5 * T, 0.0};
  const double rt[3] = {0.45 * T, 0.3 * T, 0.5 * T};
  const double rr[3] = {0.5, 0.35, 0.35};
  std::vector<SpaceTimeField> out;
  for (int m = 0; m < 3; ++m) {
    Point c{0.0, 0.0};
    for (int d = 0; d < n; ++d) c[d] = w.lo[d] + fr[m] * (w.hi[d] - w.lo[d]);
    out.push_back(space_time_bump(grid, tc[m], rt[m], c, rr[m] * width));
  }
  return out;
}

SymbolPadding route_padding(int n) { return n == 1 ? SymbolPadding{128, 8} : SymbolPadding{16, 4}; }

RouteErrors three_route_errors(const Grid& grid, double s) {
  const SpaceTimeField u = gaussian_datum(grid);
  const HeatKernel K = make_kernel(ConductivityField::identity(grid));
  const SpaceTimeField B = apply_balakrishnan(u, s, K);
  const SpaceTimeField S = apply_symbol(u, s, route_padding(grid.dim()));
  const SpaceTimeField P = apply_extension_trace(u, s, TraceMethod::pde, K).value;
  const SpaceTimeField E = apply_extension_trace(u, s, TraceMethod::kernel, K).value;
  RouteErrors r;
  r.bal_symbol = relative_l2(S, B, B);
  r.bal_pde = relative_l2(P, B, B);
  r.symbol_pde = relative_l2(P, S, B);
  r.bal_kernel = relative_l2(E, B, B);
  return r;
}

double convergence_order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace fpara
