#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpara/conductivity.hpp"
#include "fpara/dnmap.hpp"
#include "fpara/grid.hpp"

namespace fpara {

/// A smooth map of the spatial box onto itself given in closed form, with its
/// Jacobian DPhi_ij = d Phi_i / d x_j. In one dimension only the first
/// component is used.
class DiffeoMap {
 public:
  using Map = std::function<Point(Point)>;
  using Jacobian = std::function<Mat2(Point)>;

  DiffeoMap(int n, Map phi, Jacobian dphi, std::string name);

  static DiffeoMap identity(int n);
  /// x + eps r beta((x - c) / r) with beta(z) = (1 - z^2)^3 on |z| < 1.
  /// Requires 1.72 eps < 1 so that the map stays monotone.
  static DiffeoMap bump_stretch_1d(double center, double radius, double eps);
  /// c + (x - c)(1 + eps beta(|x - c| / r)), a radial dilation near c.
  static DiffeoMap radial_bump_2d(Point center, double radius, double eps);
  /// Composition outer o inner.
  static DiffeoMap compose(const DiffeoMap& outer, const DiffeoMap& inner);

  int dim() const { return n_; }
  const std::string& name() const { return name_; }
  Point operator()(Point x) const;
  Mat2 jacobian(Point x) const;
  double det(Point x) const;
  /// Newton iteration from y; throws NumericalFailure if it does not reach 1e-13.
  Point inverse(Point y) const;

  /// max |x - inverse(phi(x))| and min det over the lattice; throws if det <= 0
  /// or the round trip exceeds 1e-8.
  void validate(const Grid& grid) const;
  /// max |phi(x) - x| over lattice nodes outside Omega and on its boundary.
  double boundary_displacement(const Grid& grid, const DomainMasks& masks) const;

 private:
  int n_;
  Map phi_;
  Jacobian dphi_;
  std::string name_;
};

/// Phi_* sigma (y) = DPhi sigma DPhi^T / det DPhi evaluated at x = Phi^{-1}(y).
/// sigma is read through ConductivityField::eval. Throws NumericalFailure if
/// the result is not SPD at some node.
ConductivityField pushforward_sigma(const ConductivityField& sigma, const DiffeoMap& phi);

/// Phi_* 1 (y) = 1 / det DPhi (Phi^{-1}(y)) at every spatial node.
std::vector<double> pushforward_density(const Grid& grid, const DiffeoMap& phi);

/// The capacity-weighted problem Phi_*1 d_t v = div(Phi_*sigma grad v) with the
/// same Dirichlet data. Phi must fix the boundary of Omega.
SpaceTimeField solve_transformed(const ConductivityField& sigma, const DiffeoMap& phi, const DomainMasks& masks,
                                 const BoundarySeries& g, LocalOptions opts = {});

/// v(t, Phi^{-1}(y)) on the lattice, with multilinear interpolation in space.
SpaceTimeField transport(const SpaceTimeField& v, const DiffeoMap& phi);

struct InvarianceResult {
  double discrepancy = 0.0;  ///< ||DN_phi - DN|| / ||DN||, Frobenius
  double boundary_displacement = 0.0;
  DNMatrix dn, dn_pushed;
};

/// Compares the local DN matrices of (sigma, 1) and (Phi_*sigma, Phi_*1).
/// Unless `allow_boundary_motion` is set, Phi must fix the boundary of Omega
/// and the exterior to 1e-12.
InvarianceResult check_cauchy_invariance(const ConductivityField& sigma, const DiffeoMap& phi,
                                         const DomainMasks& masks, bool allow_boundary_motion = false,
                                         LocalOptions opts = {});

}  // namespace fpara
