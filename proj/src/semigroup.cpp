#include "fpara/semigroup.hpp"

#include <cmath>
#include <sstream>

#include "fpara/diagnostics.hpp"
#include "fpara/fourier.hpp"

namespace fpara {

ShiftStencil causal_shift_stencil(double r) {
  if (!(r >= 0.0)) throw InvalidArgument("shift stencil: shift must be non-negative");
  const int m = static_cast<int>(std::floor(r));
  ShiftStencil st;
  const int first = m == 0 ? 0 : m - 1;
  for (int i = 0; i < 4; ++i) st.offset[i] = first + i;
  for (int i = 0; i < 4; ++i) {
    double w = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) w *= (r - st.offset[j]) / static_cast<double>(st.offset[i] - st.offset[j]);
    st.weight[i] = w;
  }
  return st;
}

namespace {

RowMatrix shift_causal(const Eigen::Ref<const RowMatrix>& U, double r) {
  const ShiftStencil st = causal_shift_stencil(r);
  RowMatrix S = RowMatrix::Zero(U.rows(), U.cols());
  for (Eigen::Index k = 0; k < U.rows(); ++k)
    for (int i = 0; i < 4; ++i) {
      const Eigen::Index src = k - st.offset[i];
      if (src >= 0) S.row(k) += st.weight[i] * U.row(src);
    }
  return S;
}

RowMatrix shift_periodic(const Eigen::Ref<const RowMatrix>& U, double tau, double dt) {
  const int Nt = static_cast<int>(U.rows());
  const Eigen::Index Ns = U.cols();
  // Transform each spatial column along time.
  std::vector<cplx> buf(static_cast<std::size_t>(Nt * Ns));
  for (Eigen::Index i = 0; i < Ns; ++i)
    for (int k = 0; k < Nt; ++k) buf[i * Nt + k] = U(k, i);
  fft_batch(buf.data(), {Nt}, static_cast<int>(Ns), -1);
  for (int k = 0; k < Nt; ++k) {
    const double rho = angular_frequency(k, Nt, dt);
    // The Nyquist bin is shared by +rho and -rho; use the real average.
    const cplx f = (Nt % 2 == 0 && k == Nt / 2) ? cplx(std::cos(rho * tau), 0.0)
                                                 : std::exp(cplx(0.0, -rho * tau));
    for (Eigen::Index i = 0; i < Ns; ++i) buf[i * Nt + k] *= f;
  }
  fft_batch(buf.data(), {Nt}, static_cast<int>(Ns), +1);
  RowMatrix S(Nt, Ns);
  for (Eigen::Index i = 0; i < Ns; ++i)
    for (int k = 0; k < Nt; ++k) S(k, i) = buf[i * Nt + k].real() / Nt;
  return S;
}

}  // namespace

SpaceTimeField apply_semigroup(const SpaceTimeField& u, double tau, const HeatKernel& kernel) {
  if (!(tau >= 0.0)) throw InvalidArgument("apply_semigroup: tau must be non-negative");
  if (!(u.grid() == kernel.grid())) throw InvalidArgument("apply_semigroup: kernel grid differs from field grid");
  const Grid& g = u.grid();
  if (u.causal() && tau > 2.0 * g.spec().T) {
    std::ostringstream os;
    os << "apply_semigroup: tau=" << tau << " exceeds 2T; the output vanishes by causal support";
    warn(os.str());
    return SpaceTimeField(g);
  }
  if (tau == 0.0) return u;
  const auto U = as_matrix(u);
  const RowMatrix S = u.causal() ? shift_causal(U, tau / g.dt()) : shift_periodic(U, tau, g.dt());
  RowMatrix out = kernel.basis().apply(kernel.semigroup_multiplier(tau), S);
  return SpaceTimeField(g, std::vector<double>(out.data(), out.data() + out.size()), u.support());
}

}  // namespace fpara
