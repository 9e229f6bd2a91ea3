#pragma once

#include <array>

#include "fpara/grid.hpp"
#include "fpara/heat_kernel.hpp"

namespace fpara {

/// Four-point Lagrange stencil for the value at t_k - r dt, reading only
/// samples at or before t_k. Offsets are counted backwards from t_k.
struct ShiftStencil {
  std::array<int, 4> offset{};
  std::array<double, 4> weight{};
};

ShiftStencil causal_shift_stencil(double r);

/// P_tau u(t, x) = int p(x, z, tau) u(t - tau, z) dz.
///
/// Causal fields resolve the off-lattice shift with the causal cubic stencil;
/// periodic fields use the exact Fourier shift on the periodic time box.
SpaceTimeField apply_semigroup(const SpaceTimeField& u, double tau, const HeatKernel& kernel);

}  // namespace fpara
