#pragma once

#include "fpara/grid.hpp"
#include "fpara/heat_kernel.hpp"
#include "fpara/tau_quadrature.hpp"

namespace fpara {

struct FracConstants {
  double s;
  double d;  ///< 2^{2s-1} Gamma(s) / Gamma(1-s)
  double c;  ///< 1 / (2^{2s} Gamma(s))
};

FracConstants frac_constants(double s);

/// (d_t - div sigma grad)^s u by the Balakrishnan integral
///   -(s / Gamma(1-s)) int_0^inf (P_tau u - u) tau^{-1-s} dtau.
/// Causal fields are treated on the causal lattice, periodic fields on the
/// periodic time box.
SpaceTimeField apply_balakrishnan(const SpaceTimeField& u, double s, const HeatKernel& kernel,
                                  const TauQuadrature& quad = {});

/// How a causal field is continued past t = T inside the padded time box.
/// The causal operator ignores the continuation, but the discrete transform does
/// not: a field that is still large at T leaves a jump under zero continuation,
/// and its ringing reaches back into the window.
enum class SymbolContinuation {
  zero,
  /// u(T) + u'(T)(t - T), tapered smoothly to zero over the next T; needs time >= 2.
  linear_taper,
};

/// Zero-padding factors of the symbol route. A causal field padded in time and
/// space sees the periodic operator as an approximation of the free-space one.
struct SymbolPadding {
  int time = 1;
  int space = 1;
  SymbolContinuation continuation = SymbolContinuation::zero;
};

/// Multiplies each space-time Fourier mode by (|xi|^2 + i rho)^s, principal branch.
SpaceTimeField apply_symbol(const SpaceTimeField& u, double s, SymbolPadding pad = {});
/// Same, rejecting any conductivity other than the identity.
SpaceTimeField apply_symbol(const SpaceTimeField& u, double s, const ConductivityField& sigma,
                            SymbolPadding pad = {});

/// C-infinity step from 1 at z <= 0 to 0 at z >= 1.
double smooth_taper(double z);

/// (|xi|^2 + i rho)^s with the principal branch and 0^s = 0.
cplx symbol_value(double xi2, double rho, double s);

enum class TraceMethod { kernel, pde };

struct TraceFit {
  SpaceTimeField value;        ///< the operator, recovered from the weighted Neumann trace
  double fit_residual = 0.0;   ///< ||fit residual|| / ||a y_3^{2s}|| over the lattice
};

/// Recovers the operator from the extension: fits u~(y) - u = a y^{2s} + b y^2
/// on the three smallest positive y-nodes and returns -d_s 2s a, which is
/// d_s times the limit of -y^{1-2s} d_y u~.
TraceFit apply_extension_trace(const SpaceTimeField& u, double s, TraceMethod method,
                               const HeatKernel& kernel, const TauQuadrature& quad = {});

/// ||symbol(symbol(u, s1), s2) - symbol(u, s1 + s2)|| / ||u||.
double semigroup_property_check(const SpaceTimeField& u, double s1, double s2, SymbolPadding pad = {});

/// ||bal(bal(u, s1), s2) - symbol(u, s1 + s2)|| / ||symbol(u, s1 + s2)||.
double balakrishnan_composition_check(const SpaceTimeField& u, double s1, double s2,
                                      const HeatKernel& kernel, SymbolPadding pad,
                                      const TauQuadrature& quad = {});

}  // namespace fpara
