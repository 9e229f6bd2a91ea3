#pragma once

#include <utility>
#include <vector>

#include "fpara/grid.hpp"
#include "fpara/heat_kernel.hpp"
#include "fpara/tau_quadrature.hpp"

namespace fpara {

/// u~(t, x, y) = c_s y^{2s} int int exp(-y^2/(4 tau)) p(x, z, tau) u(t - tau, z) tau^{-1-s} dz dtau,
/// with u~(., ., 0) = u, evaluated plane by plane with the lattice-aligned tau-quadrature.
ExtensionField extend_kernel(const SpaceTimeField& u, double s, const HeatKernel& kernel,
                             const TauQuadrature& quad = {});

enum class TimeScheme { bdf2, backward_euler };

struct PdeOptions {
  int substeps = 4;                    ///< time steps per lattice interval
  TimeScheme scheme = TimeScheme::bdf2;
};

/// Solves y^{1-2s} d_t u~ = div_x(y^{1-2s} sigma grad_x u~) + d_y(y^{1-2s} d_y u~)
/// with u~(., ., 0) = u, no flux at Ymax and a zero start. The spatial operator
/// is the kernel's modal generator, so the problem decouples into one (y, t)
/// problem per mode; y is discretized by finite volumes whose face
/// conductances are the exact harmonic means of the weight.
/// Backward Euler with the lattice generator satisfies a discrete maximum principle.
ExtensionField extend_pde(const SpaceTimeField& u, double s, const HeatKernel& kernel,
                          const PdeOptions& opts = {});

/// u2 = -y^{1-2q} d_y u1 for an input of order q = 1 - s; the output has order s.
/// Planes y > 0 use 3-point derivative weights exact on span{1, y^{2q}, y^2}
/// (the plain nonuniform stencil is O(1) wrong next to y = 0); the y = 0 plane uses the
/// limit -2q a from the fit u1 - u1(0) = a y^{2q} + b y^2 on the first three nodes.
ExtensionField conjugate_transform(const ExtensionField& u1, double s);

/// ||int_y^Ymax mu^{1-2s} u2 dmu - u1|| / ||u1|| over all planes, for u2 the
/// conjugate transform of u1 (order s). Undoes the transform by integration.
double duality_round_trip(const ExtensionField& u1, const ExtensionField& u2);

/// Residual of y^{1-2s} (d_t + A) f - d_y(y^{1-2s} d_y f) for a field of order s
/// in control-volume form: the y-flux uses the exact harmonic face conductance, so
/// a + b y^{2s} has zero y-residual. A is the local lattice generator K / dx^n,
/// evaluated off the box boundary. L2 against y^{1-2s} over interior time
/// samples and the planes with y in [y_lo, y_hi], relative to the sum of the three
/// term norms.
double extension_residual(const ExtensionField& f, const HeatKernel& kernel, double y_lo, double y_hi);

enum class DecayNorm { l1t_linfx, gradient_l1t_linfx };

struct DecayProfile {
  std::vector<std::pair<double, double>> points;  ///< (y, norm) inside the window
  double slope = 0.0;                             ///< least-squares slope of log norm vs log y
  double y_lo = 0.0, y_hi = 0.0;
};

/// Window [2 diam(supp u), min(Ymax/2, sqrt(T - t_last)/2)] for the decay fit of
/// the extension of u, with t_last the last time sample where u is nonzero.
/// Plane y collects heat-kernel times near y^2/9, so beyond about sqrt(T - t_last)
/// the norms over [-T, T) fall off like a Gaussian and no longer show the power law.
std::pair<double, double> decay_window(const SpaceTimeField& u);

/// Per-plane norms over a window of y and their log-log slope. Non-positive
/// bounds select decay_window of the trace plane.
DecayProfile decay_profile(const ExtensionField& field, DecayNorm norm, double y_lo = 0.0, double y_hi = 0.0);

/// Spatial diameter of the support of a field (|value| > 1e-12 max).
double support_diameter(const SpaceTimeField& u);

}  // namespace fpara
