#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "fpara/conductivity.hpp"
#include "fpara/grid.hpp"
#include "fpara/heat_kernel.hpp"
#include "fpara/tau_quadrature.hpp"

namespace fpara {

/// Values on the boundary of Omega over time: rows are time samples, columns
/// follow DomainMasks::boundary().
using BoundarySeries = Eigen::MatrixXd;

enum class LocalScheme { bdf2, backward_euler };

struct LocalOptions {
  int substeps = 4;
  LocalScheme scheme = LocalScheme::bdf2;
};

/// Forward solver of rho d_t v = div(sigma grad v) in Omega_T with Dirichlet
/// trace g on the boundary of Omega and v = 0 at t = -T. Space uses the lattice
/// stiffness K of sigma; time uses BDF2 (first step backward Euler) or backward
/// Euler, with boundary data between lattice times from the causal cubic stencil.
/// The two system matrices are factorized once.
class LocalSolver {
 public:
  /// `capacity` is rho at every spatial node; empty means rho = 1.
  LocalSolver(const ConductivityField& sigma, const DomainMasks& masks, std::vector<double> capacity = {},
              LocalOptions opts = {});
  ~LocalSolver();
  LocalSolver(LocalSolver&&) noexcept;

  /// Solution on the full lattice: interior values, g on the boundary, zero elsewhere.
  SpaceTimeField solve(const BoundarySeries& g) const;

  const DomainMasks& masks() const { return masks_; }
  const ConductivityField& sigma() const { return sigma_; }

 private:
  struct Impl;
  ConductivityField sigma_;
  DomainMasks masks_;
  std::unique_ptr<Impl> impl_;
};

SpaceTimeField solve_local(const ConductivityField& sigma, const DomainMasks& masks, const BoundarySeries& g,
                           LocalOptions opts = {});

/// sigma grad v . nu at each boundary node and time sample. The normal component
/// of the gradient is the one-sided second-order inward difference, tangential
/// components are centered along the face.
BoundarySeries boundary_flux(const SpaceTimeField& v, const ConductivityField& sigma, const DomainMasks& masks);

BoundarySeries local_dn(const ConductivityField& sigma, const DomainMasks& masks, const BoundarySeries& g,
                        LocalOptions opts = {});

/// Restriction of a field to the boundary nodes.
BoundarySeries boundary_trace(const SpaceTimeField& v, const DomainMasks& masks);

/// The constrained problem H^s u = 0 in Omega_T, u = f outside Omega, u = 0 at
/// t = -T, with H^s the causal Balakrishnan operator of the kernel. That operator
/// is block lower-triangular Toeplitz in time, so the constrained system is solved
/// exactly by forward substitution over time samples: one dense LU of the
/// instantaneous block on Omega, and the history kept in modal coordinates.
class NonlocalSolver {
 public:
  NonlocalSolver(const HeatKernel& kernel, double s, const DomainMasks& masks, const TauQuadrature& quad = {});
  ~NonlocalSolver();
  NonlocalSolver(NonlocalSolver&&) noexcept;

  /// Requires f to vanish outside W (checked) and to be causal.
  SpaceTimeField solve(const SpaceTimeField& f) const;
  /// H^s u on the lattice.
  SpaceTimeField apply_operator(const SpaceTimeField& u) const;
  /// H^s u_f restricted to W, zero elsewhere.
  SpaceTimeField dn(const SpaceTimeField& f) const;

  double s() const { return s_; }
  const HeatKernel& kernel() const { return kernel_; }
  const DomainMasks& masks() const { return masks_; }
  /// Largest ||u|| / ||f|| seen by solve().
  double energy_ratio() const { return energy_ratio_; }

 private:
  struct Impl;
  HeatKernel kernel_;
  double s_;
  DomainMasks masks_;
  std::unique_ptr<Impl> impl_;
  mutable double energy_ratio_ = 0.0;
};

SpaceTimeField solve_nonlocal(const HeatKernel& kernel, double s, const DomainMasks& masks, const SpaceTimeField& f,
                              const TauQuadrature& quad = {});
SpaceTimeField nonlocal_dn(const HeatKernel& kernel, double s, const DomainMasks& masks, const SpaceTimeField& f,
                           const TauQuadrature& quad = {});

/// Dense lattice matrix of H^s (size Nt Nsp), column j = apply_balakrishnan of
/// the j-th lattice basis field (index k Nsp + i). Only for small grids.
Eigen::MatrixXd dense_operator(const HeatKernel& kernel, double s, const TauQuadrature& quad = {});

struct CauchyPair {
  BoundarySeries trace;
  BoundarySeries flux;
  SpaceTimeField u;  ///< nonlocal solution
  SpaceTimeField v;  ///< key function
};

/// f -> nonlocal solution u -> extension -> v -> (v, sigma grad v . nu) on the boundary of Omega.
CauchyPair transfer_map(const NonlocalSolver& solver, const SpaceTimeField& f, const TauQuadrature& quad = {});

/// ||solve_local(trace) - v|| / ||v|| over Omega_T.
double transfer_consistency(const CauchyPair& pair, const LocalSolver& local);

enum class DNKind { local, nonlocal };

struct DNMatrix {
  DNKind kind = DNKind::local;
  /// Spatial nodes of the rows and columns; the flat index is k * nodes.size() + node position.
  std::vector<std::size_t> row_nodes, col_nodes;
  int nt = 0;
  Eigen::MatrixXd entries;
  double s = 0.0;
  std::uint64_t sigma_hash = 0, grid_hash = 0;

  /// Largest |entry| whose response time precedes the first time sample of the
  /// (mollified) data column, relative to max |entry|.
  double causal_violation() const;
};

/// Column order of the assembly; `reverse` is only used to check that the
/// result does not depend on it.
enum class AssemblyOrder { forward, reverse };

/// Columns are responses to impulses at (node, time) mollified by the one-cell
/// hat (1/4, 1/2, 1/4) in time and along each spatial axis within the data set
/// (the boundary for the local kind, W for the nonlocal kind). Impulses at
/// t = -T are skipped since causal data vanish there.
DNMatrix assemble_local_dn(const LocalSolver& solver, AssemblyOrder order = AssemblyOrder::forward);
DNMatrix assemble_nonlocal_dn(const NonlocalSolver& solver, AssemblyOrder order = AssemblyOrder::forward);

/// Applies the DN map to a random combination of the mollified impulses behind
/// the columns (coefficients uniform in [-1, 1] from `seed`) and returns
/// ||D c - DN(data)|| / ||D c||.
double dn_reproduction_error(const LocalSolver& solver, const DNMatrix& D, std::uint64_t seed);
double dn_reproduction_error(const NonlocalSolver& solver, const DNMatrix& D, std::uint64_t seed);

/// Hash of the grid parameters, for archive metadata.
std::uint64_t grid_hash(const Grid& grid);

}  // namespace fpara
