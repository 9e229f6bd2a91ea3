#pragma once

#include <complex>
#include <vector>

#include "fpara/grid.hpp"

namespace fpara {

using cplx = std::complex<double>;

/// In-place complex DFT over a row-major array of the given shape.
/// sign = -1 is the forward transform; neither direction is normalized.
void fft_inplace(std::vector<cplx>& data, const std::vector<int>& shape, int sign);

/// Transforms `batch` consecutive row-major arrays of the given shape.
void fft_batch(cplx* data, const std::vector<int>& shape, int batch, int sign);

/// Angular frequency of DFT index k for a periodic axis of `n` samples with spacing h.
/// Index n/2 (even n) maps to the positive Nyquist frequency.
double angular_frequency(int k, int n, double h);

/// Unitary space-time spectrum of a field; shape is (Nt, Nx[, Nx]).
struct SpectralArray {
  std::vector<int> shape;
  std::vector<cplx> values;
  double norm() const;
};

SpectralArray fourier_forward(const SpaceTimeField& u);

/// Inverse of fourier_forward. The imaginary residue of the inverse transform
/// is reported through `imag_residue` when requested.
SpaceTimeField fourier_inverse(const SpectralArray& a, const Grid& grid,
                               TimeSupport support = TimeSupport::periodic,
                               double* imag_residue = nullptr);

}  // namespace fpara
