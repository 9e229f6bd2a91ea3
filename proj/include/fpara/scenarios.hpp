#pragma once

#include <string>

#include "fpara/conductivity.hpp"
#include "fpara/fracop.hpp"
#include "fpara/grid.hpp"

namespace fpara {

/// Conductivity family by name: "identity", "constant" (uses matrix) or "bump"
/// (I + bump(|x - center| / radius) matrix).
struct SigmaSpec {
  std::string kind = "identity";
  Mat2 matrix = Mat2::Zero();
  Point center{0.0, 0.0};
  double radius = 0.9;

  ConductivityField build(const Grid& grid) const;
};

/// Everything a run needs besides the datum.
struct Scenario {
  std::string name;
  GridSpec grid;
  Box omega, w;
  SigmaSpec sigma;
  double s = 0.5;
};

/// 1D: box [-8, 8) with Nx = 128, T = 1, Nt = Ny = 64, Omega = (-1, 1), W = [1.5, 2.5].
Scenario default_scenario_1d();
/// 2D: box [-3, 3)^2 with Nx = Nt = 48, Ny = 64, Omega = (-1, 1)^2,
/// W = [1.5, 2.5] x [-0.5, 0.5], anisotropic bump sigma (Id outside Omega).
Scenario default_scenario_2d();
/// The 2D scenario with sigma = Id.
Scenario default_scenario_2d_identity();
/// Long window for decay fits: n = 1, box [-8, 8) with Nx = 128, T = 32,
/// Nt = 512, Ny = 96, s = 1/2. The y-norms are L1 over all time, so the datum
/// sits early (decay_datum) and plane y only needs times up to about y^2/9.
Scenario default_decay_scenario();
/// bump((t + 15T/16) / (T/32)) bump(x / 0.25).
SpaceTimeField decay_datum(const Grid& grid);
/// Grid of the operator cross-checks: n = 1, L = 4, Nx = Nt = Ny = 64.
GridSpec operator_grid();

/// Causal datum exp(-((t + 0.2)/0.2)^2 - |x/0.8|^2). At t = -T it is below 1e-30,
/// so it carries no hidden jump at the start of the window.
SpaceTimeField gaussian_datum(const Grid& grid);

/// bump((t - tc)/rt) prod_a bump((x_a - c_a)/r).
SpaceTimeField space_time_bump(const Grid& grid, double tc, double rt, Point center, double r);

/// Three bumps inside W_T with distinct centres and times.
std::vector<SpaceTimeField> exterior_bumps(const Grid& grid, const Box& w);

/// Pairwise relative L2 discrepancies of the operator routes on one datum,
/// each relative to the Balakrishnan result.
struct RouteErrors {
  double bal_symbol = 0.0;
  double bal_pde = 0.0;     ///< extension trace through the PDE solver
  double symbol_pde = 0.0;
  double bal_kernel = 0.0;  ///< extension trace through the kernel representation
};

/// Symbol padding {128, 8} in 1D: the wrap-around floor of a padded time box
/// falls like P^{-1-s} and is largest for small s.
SymbolPadding route_padding(int n);

RouteErrors three_route_errors(const Grid& grid, double s);

/// log2 of the error ratio between a grid and its refinement by 2.
double convergence_order(double coarse, double fine);

}  // namespace fpara
