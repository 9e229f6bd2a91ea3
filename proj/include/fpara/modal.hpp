#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "fpara/conductivity.hpp"
#include "fpara/fourier.hpp"
#include "fpara/grid.hpp"

namespace fpara {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Stiffness matrix K of the conservative lattice discretization of -div(sigma grad)
/// on the box with no-flux faces: (K u)_i / dx^n approximates -div(sigma grad u)(x_i).
/// Axis fluxes use sigma at edge midpoints; the off-diagonal coupling uses
/// cell-averaged gradients. K is symmetric with zero row sums.
SparseMatrix fd_stiffness(const ConductivityField& sigma);

/// Diagonalization of the spatial generator, A = Q diag(mu) Q^{-1}, so that the
/// heat semigroup acts mode by mode as exp(-tau mu).
///
/// `spectral` uses Fourier modes of a constant sigma on the box enlarged by an
/// integer padding factor (pad = 1 is the periodic box, pad >= 2 approximates
/// zero extension). `finite_difference` diagonalizes K / dx^n.
class ModalBasis {
 public:
  enum class Kind { spectral, finite_difference };

  static ModalBasis spectral(const Grid& grid, const Mat2& sigma, int pad);
  static ModalBasis finite_difference(const ConductivityField& sigma);

  Kind kind() const { return kind_; }
  int pad() const { return pad_; }
  const Grid& grid() const { return grid_; }
  Eigen::Index num_modes() const { return mu_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return mu_; }

  /// Rows are spatial slices (rows x Nsp) -> modal coefficients (rows x M).
  Eigen::MatrixXcd to_modes(const Eigen::Ref<const RowMatrix>& slices) const;
  /// Inverse of to_modes; the imaginary part is discarded.
  RowMatrix from_modes(const Eigen::MatrixXcd& coeffs) const;

  /// (Q diag(m) Q^{-1})[rows, cols] in physical coordinates.
  Eigen::MatrixXd physical_block(const Eigen::VectorXd& m, const std::vector<std::size_t>& rows,
                                 const std::vector<std::size_t>& cols) const;

  /// Applies Q diag(m) Q^{-1} to each row.
  RowMatrix apply(const Eigen::VectorXd& m, const Eigen::Ref<const RowMatrix>& slices) const;

 private:
  ModalBasis(Grid grid) : grid_(std::move(grid)) {}

  Kind kind_ = Kind::spectral;
  Grid grid_;
  int pad_ = 1;
  std::vector<int> padded_shape_;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd V_;  // finite-difference eigenvectors (columns)
};

/// View of a field as an (Nt x Nsp) row-major matrix.
inline Eigen::Map<const RowMatrix> as_matrix(const SpaceTimeField& u) {
  return {u.values().data(), u.grid().nt(), static_cast<Eigen::Index>(u.grid().spatial_size())};
}
inline Eigen::Map<RowMatrix> as_matrix(SpaceTimeField& u) {
  return {u.values().data(), u.grid().nt(), static_cast<Eigen::Index>(u.grid().spatial_size())};
}

}  // namespace fpara
