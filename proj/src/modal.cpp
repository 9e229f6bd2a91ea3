#include "fpara/modal.hpp"

#include <lapacke.h>

#include <cmath>

#include "fpara/diagnostics.hpp"

namespace fpara {

SparseMatrix fd_stiffness(const ConductivityField& sigma) {
  const Grid& g = sigma.grid();
  const int n = g.dim(), N = g.nx();
  const double h = g.dx();
  const double vol = g.cell_volume();
  std::vector<Eigen::Triplet<double>> trip;
  auto add = [&](std::size_t i, std::size_t j, double v) { trip.emplace_back(i, j, v); };
  auto edge = [&](std::size_t i, std::size_t j, double c) {
    const double w = c * vol / (h * h);
    add(i, i, w);
    add(j, j, w);
    add(i, j, -w);
    add(j, i, -w);
  };
  if (n == 1) {
    for (int i = 0; i + 1 < N; ++i) edge(i, i + 1, sigma.eval({g.x(i) + 0.5 * h, 0.0})(0, 0));
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const std::size_t c = g.flatten({i, j});
        if (i + 1 < N) edge(c, g.flatten({i + 1, j}), sigma.eval({g.x(i) + 0.5 * h, g.x(j)})(0, 0));
        if (j + 1 < N) edge(c, g.flatten({i, j + 1}), sigma.eval({g.x(i), g.x(j) + 0.5 * h})(1, 1));
        if (i + 1 < N && j + 1 < N) {
          const double s12 = sigma.eval({g.x(i) + 0.5 * h, g.x(j) + 0.5 * h})(0, 1);
          if (s12 == 0.0) continue;
          // Corners (i,j), (i+1,j), (i,j+1), (i+1,j+1) with cell gradients a.u, b.u.
          const std::size_t idx[4] = {c, g.flatten({i + 1, j}), g.flatten({i, j + 1}),
                                      g.flatten({i + 1, j + 1})};
          const double a[4] = {-1, 1, -1, 1}, b[4] = {-1, -1, 1, 1};
          const double w = s12 * vol / (4.0 * h * h);
          for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) add(idx[p], idx[q], w * (a[p] * b[q] + b[p] * a[q]));
        }
      }
  }
  SparseMatrix K(static_cast<Eigen::Index>(g.spatial_size()), static_cast<Eigen::Index>(g.spatial_size()));
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

ModalBasis ModalBasis::spectral(const Grid& grid, const Mat2& sigma, int pad) {
  if (pad < 1) throw InvalidArgument("modal basis: padding factor must be >= 1");
  ModalBasis b(grid);
  b.kind_ = Kind::spectral;
  b.pad_ = pad;
  const int n = grid.dim(), Np = pad * grid.nx();
  b.padded_shape_.assign(n, Np);
  const Eigen::Index M = n == 1 ? Np : static_cast<Eigen::Index>(Np) * Np;
  b.mu_.resize(M);
  for (Eigen::Index k = 0; k < M; ++k) {
    if (n == 1) {
      const double xi = angular_frequency(static_cast<int>(k), Np, grid.dx());
      b.mu_[k] = sigma(0, 0) * xi * xi;
    } else {
      const double x0 = angular_frequency(static_cast<int>(k / Np), Np, grid.dx());
      const double x1 = angular_frequency(static_cast<int>(k % Np), Np, grid.dx());
      b.mu_[k] = sigma(0, 0) * x0 * x0 + 2.0 * sigma(0, 1) * x0 * x1 + sigma(1, 1) * x1 * x1;
    }
  }
  return b;
}

ModalBasis ModalBasis::finite_difference(const ConductivityField& sigma) {
  ModalBasis b(sigma.grid());
  b.kind_ = Kind::finite_difference;
  Eigen::MatrixXd A = Eigen::MatrixXd(fd_stiffness(sigma)) / sigma.grid().cell_volume();
  const lapack_int n = static_cast<lapack_int>(A.rows());
  Eigen::VectorXd w(n);
  // Divide and conquer; several times faster than Eigen's QR iteration at a few thousand nodes.
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, A.data(), n, w.data());
  if (info != 0) throw NumericalFailure("modal basis: eigensolver failed");
  b.mu_ = w.cwiseMax(0.0);
  b.V_ = std::move(A);
  return b;
}

Eigen::MatrixXcd ModalBasis::to_modes(const Eigen::Ref<const RowMatrix>& slices) const {
  const Eigen::Index rows = slices.rows();
  const Eigen::Index Nsp = static_cast<Eigen::Index>(grid_.spatial_size());
  if (slices.cols() != Nsp) throw InvalidArgument("modal basis: slice length mismatch");
  if (kind_ == Kind::finite_difference) return (slices * V_).cast<cplx>();

  const Eigen::Index M = mu_.size();
  const int Np = padded_shape_[0], Nx = grid_.nx();
  std::vector<cplx> buf(static_cast<std::size_t>(rows * M), cplx(0.0));
  for (Eigen::Index r = 0; r < rows; ++r) {
    cplx* dst = buf.data() + r * M;
    for (Eigen::Index i = 0; i < Nsp; ++i) {
      const Eigen::Index pi = grid_.dim() == 1 ? i : (i / Nx) * Np + (i % Nx);
      dst[pi] = slices(r, i);
    }
  }
  fft_batch(buf.data(), padded_shape_, static_cast<int>(rows), -1);
  Eigen::MatrixXcd out(rows, M);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index k = 0; k < M; ++k) out(r, k) = buf[r * M + k];
  return out;
}

RowMatrix ModalBasis::from_modes(const Eigen::MatrixXcd& coeffs) const {
  const Eigen::Index rows = coeffs.rows();
  const Eigen::Index Nsp = static_cast<Eigen::Index>(grid_.spatial_size());
  if (coeffs.cols() != mu_.size()) throw InvalidArgument("modal basis: mode count mismatch");
  if (kind_ == Kind::finite_difference) return coeffs.real() * V_.transpose();

  const Eigen::Index M = mu_.size();
  const int Np = padded_shape_[0], Nx = grid_.nx();
  std::vector<cplx> buf(static_cast<std::size_t>(rows * M));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index k = 0; k < M; ++k) buf[r * M + k] = coeffs(r, k);
  fft_batch(buf.data(), padded_shape_, static_cast<int>(rows), +1);
  RowMatrix out(rows, Nsp);
  const double scale = 1.0 / static_cast<double>(M);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index i = 0; i < Nsp; ++i) {
      const Eigen::Index pi = grid_.dim() == 1 ? i : (i / Nx) * Np + (i % Nx);
      out(r, i) = buf[r * M + pi].real() * scale;
    }
  return out;
}

RowMatrix ModalBasis::apply(const Eigen::VectorXd& m, const Eigen::Ref<const RowMatrix>& slices) const {
  Eigen::MatrixXcd c = to_modes(slices);
  for (Eigen::Index r = 0; r < c.rows(); ++r) c.row(r).array() *= m.transpose().array();
  return from_modes(c);
}

Eigen::MatrixXd ModalBasis::physical_block(const Eigen::VectorXd& m, const std::vector<std::size_t>& rows,
                                           const std::vector<std::size_t>& cols) const {
  const Eigen::Index R = static_cast<Eigen::Index>(rows.size()), C = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd out(R, C);
  if (kind_ == Kind::finite_difference) {
    Eigen::MatrixXd Vr(R, V_.cols()), Vc(C, V_.cols());
    for (Eigen::Index i = 0; i < R; ++i) Vr.row(i) = V_.row(static_cast<Eigen::Index>(rows[i]));
    for (Eigen::Index j = 0; j < C; ++j) Vc.row(j) = V_.row(static_cast<Eigen::Index>(cols[j]));
    out = Vr * m.asDiagonal() * Vc.transpose();
    return out;
  }
  RowMatrix unit = RowMatrix::Zero(C, static_cast<Eigen::Index>(grid_.spatial_size()));
  for (Eigen::Index j = 0; j < C; ++j) unit(j, static_cast<Eigen::Index>(cols[j])) = 1.0;
  const RowMatrix img = apply(m, unit);
  for (Eigen::Index j = 0; j < C; ++j)
    for (Eigen::Index i = 0; i < R; ++i) out(i, j) = img(j, static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace fpara
