#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fpara/grid.hpp"

namespace fpara {

using Mat2 = Eigen::Matrix2d;
using Point = std::array<double, 2>;

/// Smooth bump exp(1 - 1/(1 - r^2)) on r < 1, equal to 1 at r = 0.
double smooth_bump(double r);

/// Symmetric positive-definite matrix field on the spatial lattice. In one
/// dimension only the (0,0) entry is meaningful; the rest is kept at identity.
class ConductivityField {
 public:
  using Function = std::function<Mat2(Point)>;

  static ConductivityField identity(const Grid& grid);
  static ConductivityField constant(const Grid& grid, const Mat2& sigma);
  static ConductivityField from_function(const Grid& grid, Function f, std::string name);
  /// I + bump(|x - c| / radius) * M, a smooth perturbation supported in a ball.
  static ConductivityField bump_perturbation(const Grid& grid, Point center, double radius,
                                             const Mat2& M);
  /// Re-samples the same analytic field on another grid.
  ConductivityField on_grid(const Grid& grid) const;

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  const Mat2& at(std::size_t node) const { return nodes_[node]; }
  /// Analytic value when available, otherwise multilinear interpolation with
  /// clamping to the boundary value beyond the box.
  Mat2 eval(Point p) const;

  bool is_constant() const { return constant_; }
  bool is_identity() const;
  /// Largest lambda with spectrum(sigma(x)) in [lambda, 1/lambda] at every node.
  double ellipticity() const;
  void require_ellipticity(double lambda) const;
  /// True when sigma is the identity at every node outside the closure of Omega.
  bool identity_outside(const DomainMasks& masks, double tol = 1e-12) const;

  const std::string& name() const { return name_; }
  std::uint64_t hash() const;

 private:
  ConductivityField(const Grid& grid, std::vector<Mat2> nodes, Function f, bool constant,
                    std::string name);

  Grid grid_;
  std::vector<Mat2> nodes_;
  Function f_;
  bool constant_;
  std::string name_;
};

/// FNV-1a over raw bytes, used to tag archives and caches.
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 1469598103934665603ull);

}  // namespace fpara
