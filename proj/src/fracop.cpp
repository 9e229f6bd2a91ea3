#include "fpara/fracop.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include "fpara/diagnostics.hpp"
#include "fpara/extension.hpp"
#include "fpara/fourier.hpp"

namespace fpara {

FracConstants frac_constants(double s) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("frac_constants: s must lie in (0,1)");
  const double gs = boost::math::tgamma(s);
  const double g1s = boost::math::tgamma(1.0 - s);
  return {s, std::exp2(2.0 * s - 1.0) * gs / g1s, 1.0 / (std::exp2(2.0 * s) * gs)};
}

SpaceTimeField apply_balakrishnan(const SpaceTimeField& u, double s, const HeatKernel& kernel,
                                  const TauQuadrature& quad) {
  if (!(u.grid() == kernel.grid())) throw InvalidArgument("apply_balakrishnan: kernel grid differs from field grid");
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("apply_balakrishnan: s must lie in (0,1)");
  if (u.causal()) return apply_causal_modal(u, kernel.basis(), balakrishnan_coefficients(kernel, s, quad));
  return apply_periodic_modal(u, kernel.basis(), balakrishnan_multipliers(kernel, s, quad));
}

double smooth_taper(double z) {
  if (z <= 0.0) return 1.0;
  if (z >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / z), b = std::exp(-1.0 / (1.0 - z));
  return b / (a + b);
}

cplx symbol_value(double xi2, double rho, double s) {
  if (xi2 == 0.0 && rho == 0.0) return cplx(0.0);
  return std::pow(cplx(xi2, rho), s);
}

SpaceTimeField apply_symbol(const SpaceTimeField& u, double s, SymbolPadding pad) {
  if (!(s > 0.0 && s <= 1.0)) throw InvalidArgument("apply_symbol: s must lie in (0,1]");
  if (pad.time < 1 || pad.space < 1) throw InvalidArgument("apply_symbol: padding factors must be >= 1");
  const Grid& g = u.grid();
  const int n = g.dim(), Nt = g.nt(), Nx = g.nx();
  const int Pt = pad.time * Nt, Px = pad.space * Nx;
  std::vector<int> shape{Pt, Px};
  if (n == 2) shape.push_back(Px);
  const std::size_t sp = n == 1 ? static_cast<std::size_t>(Px) : static_cast<std::size_t>(Px) * Px;
  std::vector<cplx> buf(static_cast<std::size_t>(Pt) * sp, cplx(0.0));
  auto padded_index = [&](int k, std::size_t i) {
    if (n == 1) return static_cast<std::size_t>(k) * sp + i;
    const std::size_t a = i / Nx, b = i % Nx;
    return static_cast<std::size_t>(k) * sp + a * Px + b;
  };
  for (int k = 0; k < Nt; ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) buf[padded_index(k, i)] = u(k, i);
  if (pad.continuation == SymbolContinuation::linear_taper && u.causal()) {
    if (pad.time < 2 || Nt < 3) throw InvalidArgument("apply_symbol: tapered continuation needs time padding >= 2");
    const int Nw = Nt / 2;
    const double W = Nw * g.dt();
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      const double last = u(Nt - 1, i);
      const double slope = (3.0 * last - 4.0 * u(Nt - 2, i) + u(Nt - 3, i)) / (2.0 * g.dt());
      for (int m = 1; m < Nw; ++m) {
        const double tau = m * g.dt();
        buf[padded_index(Nt - 1 + m, i)] = (last + slope * tau) * smooth_taper(tau / W);
      }
    }
  }
  fft_inplace(buf, shape, -1);
  for (int kt = 0; kt < Pt; ++kt) {
    const double rho = angular_frequency(kt, Pt, g.dt());
    const bool nyq = Pt % 2 == 0 && kt == Pt / 2;
    for (std::size_t m = 0; m < sp; ++m) {
      double xi2;
      if (n == 1) {
        const double xi = angular_frequency(static_cast<int>(m), Px, g.dx());
        xi2 = xi * xi;
      } else {
        const double a = angular_frequency(static_cast<int>(m / Px), Px, g.dx());
        const double b = angular_frequency(static_cast<int>(m % Px), Px, g.dx());
        xi2 = a * a + b * b;
      }
      // The Nyquist bin stands for both +rho and -rho.
      const cplx f = nyq ? cplx(symbol_value(xi2, rho, s).real(), 0.0) : symbol_value(xi2, rho, s);
      buf[static_cast<std::size_t>(kt) * sp + m] *= f;
    }
  }
  fft_inplace(buf, shape, +1);
  const double scale = 1.0 / static_cast<double>(buf.size());
  std::vector<double> out(g.size());
  for (int k = 0; k < Nt; ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      out[k * g.spatial_size() + i] = buf[padded_index(k, i)].real() * scale;
  return SpaceTimeField(g, std::move(out), u.support());
}

SpaceTimeField apply_symbol(const SpaceTimeField& u, double s, const ConductivityField& sigma, SymbolPadding pad) {
  if (!sigma.is_identity()) throw InvalidArgument("apply_symbol: the symbol route requires sigma = Id");
  return apply_symbol(u, s, pad);
}

TraceFit apply_extension_trace(const SpaceTimeField& u, double s, TraceMethod method,
                               const HeatKernel& kernel, const TauQuadrature& quad) {
  if (!u.causal()) throw InvalidArgument("apply_extension_trace: the field must be causal");
  const Grid& g = u.grid();
  std::array<SpaceTimeField, 3> planes{SpaceTimeField(g), SpaceTimeField(g), SpaceTimeField(g)};
  if (method == TraceMethod::kernel) {
    const Eigen::MatrixXcd U = kernel.basis().to_modes(as_matrix(u));
    for (int j = 1; j <= 3; ++j) {
      const Eigen::MatrixXd C = extension_coefficients(kernel, s, g.y(j), quad);
      const RowMatrix r = kernel.basis().from_modes(causal_convolve(C, U));
      planes[j - 1] = SpaceTimeField(g, std::vector<double>(r.data(), r.data() + r.size()));
    }
  } else {
    const ExtensionField ext = extend_pde(u, s, kernel);
    for (int j = 1; j <= 3; ++j) planes[j - 1] = ext.plane_field(j);
  }

  // Least squares for (a, b) in u~ - u = a y^{2s} + b y^2 at y_1, y_2, y_3.
  Eigen::Matrix<double, 3, 2> B;
  for (int j = 0; j < 3; ++j) {
    const double y = g.y(j + 1);
    B(j, 0) = std::pow(y, 2.0 * s);
    B(j, 1) = y * y;
  }
  const Eigen::Matrix<double, 2, 3> pinv = (B.transpose() * B).inverse() * B.transpose();
  const FracConstants fc = frac_constants(s);
  std::vector<double> out(g.size());
  double res2 = 0.0, lead2 = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double u0 = u.values()[p];
    const Eigen::Vector3d d(planes[0].values()[p] - u0, planes[1].values()[p] - u0, planes[2].values()[p] - u0);
    const Eigen::Vector2d ab = pinv * d;
    res2 += (d - B * ab).squaredNorm();
    lead2 += ab[0] * ab[0] * B(2, 0) * B(2, 0);
    out[p] = -fc.d * 2.0 * s * ab[0];
  }
  TraceFit fit{SpaceTimeField(g, std::move(out)), lead2 > 0.0 ? std::sqrt(res2 / lead2) : 0.0};
  if (fit.fit_residual > 0.05) {
    std::ostringstream os;
    os << "apply_extension_trace: fit residual " << fit.fit_residual
       << " exceeds 5% of the leading term; the y-grid is too coarse near 0";
    throw NumericalFailure(os.str());
  }
  return fit;
}

double semigroup_property_check(const SpaceTimeField& u, double s1, double s2, SymbolPadding pad) {
  if (!(s1 > 0.0 && s2 > 0.0 && s1 + s2 <= 1.0)) throw InvalidArgument("semigroup_property_check: need s1, s2 > 0 and s1 + s2 <= 1");
  const double nu = u.norm();
  if (nu == 0.0) return 0.0;
  const SpaceTimeField a = apply_symbol(apply_symbol(u, s1, pad), s2, pad);
  const SpaceTimeField b = apply_symbol(u, s1 + s2, pad);
  return (a - b).norm() / nu;
}

double balakrishnan_composition_check(const SpaceTimeField& u, double s1, double s2,
                                      const HeatKernel& kernel, SymbolPadding pad, const TauQuadrature& quad) {
  if (!(s1 > 0.0 && s2 > 0.0 && s1 + s2 < 1.0)) throw InvalidArgument("balakrishnan_composition_check: need s1 + s2 < 1");
  const SpaceTimeField a = apply_balakrishnan(apply_balakrishnan(u, s1, kernel, quad), s2, kernel, quad);
  const SpaceTimeField b = apply_symbol(u, s1 + s2, pad);
  const double nb = b.norm();
  return nb == 0.0 ? (a - b).norm() : (a - b).norm() / nb;
}

}  // namespace fpara
