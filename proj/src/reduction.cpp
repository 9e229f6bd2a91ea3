#include "fpara/reduction.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fpara/diagnostics.hpp"
#include "fpara/extension.hpp"
#include "fpara/quadrature.hpp"

namespace fpara {

ExtensionField compute_w(const ExtensionField& utilde) {
  const Grid& g = utilde.grid();
  const double s = utilde.order(), p = 1.0 - 2.0 * s;
  const auto y = g.y_coords();
  const int N = g.ny();
  ExtensionField w(g, 1.0 - s);
  const double scale = utilde.max_abs();
  double tail_sum = 0.0, value_sum = 0.0;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      const std::vector<double> col = utilde.column(k, i);
      const std::vector<double> up = upper_weighted_integrals(y, col, p);
      for (int j = 0; j <= N; ++j) w.at(j, k, i) = up[j];
      double tail = weighted_tail_estimate(y, col, p);
      // Samples at roundoff level carry no decay information; bound them by one cell.
      if (!std::isfinite(tail) && std::abs(col[N]) <= 1e-10 * scale)
        tail = std::abs(col[N]) * std::pow(y[N], p + 1.0);
      tail_sum += std::abs(tail);
      value_sum += std::abs(up[0]);
    }
  if (tail_sum > 0.01 * value_sum) {
    std::ostringstream os;
    os << "compute_w: tail beyond Ymax estimated at " << tail_sum / value_sum
       << " of the integral; increase Ymax";
    throw NumericalFailure(os.str());
  }
  return w;
}

SpaceTimeField compute_v(const ExtensionField& utilde) { return compute_w(utilde).plane_field(0); }

double TestBump::value(double t, Point x, int n) const {
  const double a = (t - tc) / rt;
  if (std::abs(a) >= 1.0) return 0.0;
  double v = smooth_bump(a);
  for (int d = 0; d < n; ++d) {
    const double b = (x[d] - center[d]) / r;
    if (std::abs(b) >= 1.0) return 0.0;
    v *= smooth_bump(b);
  }
  return v;
}

namespace {

// d/dz exp(1 - 1/(1 - z^2)) = -2z / (1 - z^2)^2 * bump(z).
double bump_derivative(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  return -2.0 * z / (q * q) * smooth_bump(z);
}

}  // namespace

std::array<double, 3> TestBump::gradient(double t, Point x, int n) const {
  std::array<double, 3> f{};  // factor values: time, x0, x1
  std::array<double, 3> df{};
  const double a = (t - tc) / rt;
  f[0] = std::abs(a) < 1.0 ? smooth_bump(a) : 0.0;
  df[0] = bump_derivative(a) / rt;
  f[1] = f[2] = 1.0;
  for (int d = 0; d < n; ++d) {
    const double b = (x[d] - center[d]) / r;
    f[d + 1] = std::abs(b) < 1.0 ? smooth_bump(b) : 0.0;
    df[d + 1] = bump_derivative(b) / r;
  }
  std::array<double, 3> g{};
  g[0] = df[0] * f[1] * f[2];
  g[1] = f[0] * df[1] * f[2];
  g[2] = n == 2 ? f[0] * f[1] * df[2] : 0.0;
  return g;
}

std::vector<TestBump> key_test_family(const Grid& grid, const DomainMasks& masks) {
  const int n = grid.dim();
  const Box& b = masks.omega_box();
  const double T = grid.spec().T;
  const double fracs[3] = {0.35, 0.5, 0.65};
  const double scales[3] = {0.15, 0.22, 0.3};
  std::vector<TestBump> fam;
  for (double f : fracs)
    for (double sc : scales) {
      TestBump tb;
      tb.tc = -T + f * 2.0 * T;
      tb.rt = sc * 2.0 * T;
      double width = 1e300;
      for (int d = 0; d < n; ++d) {
        tb.center[d] = b.lo[d] + f * (b.hi[d] - b.lo[d]);
        width = std::min(width, b.hi[d] - b.lo[d]);
      }
      tb.r = sc * width;
      fam.push_back(tb);
    }
  return fam;
}

namespace {

// Centered difference of v along axis a at spatial node i; zero at box faces.
double centered(const SpaceTimeField& v, int k, std::size_t i, int a) {
  const Grid& g = v.grid();
  auto mi = g.unflatten(i);
  if (mi[a] == 0 || mi[a] + 1 == g.nx()) return 0.0;
  auto mp = mi, mm = mi;
  ++mp[a];
  --mm[a];
  return (v(k, g.flatten(mp)) - v(k, g.flatten(mm))) / (2.0 * g.dx());
}

}  // namespace

KeyEquationResult check_key_equation(const SpaceTimeField& v, const ConductivityField& sigma,
                                     const DomainMasks& masks) {
  const Grid& g = v.grid();
  if (!(sigma.grid() == g)) throw InvalidArgument("check_key_equation: sigma grid differs from field grid");
  const int n = g.dim();
  const double meas = g.dt() * g.cell_volume();
  const auto omega = masks.omega_nodes();
  double vn2 = 0.0;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i : omega) vn2 += v(k, i) * v(k, i) * meas;
  KeyEquationResult res;
  const double vn = std::sqrt(vn2);
  for (const TestBump& tb : key_test_family(g, masks)) {
    double integral = 0.0, ph2 = 0.0;
    for (int k = 0; k < g.nt(); ++k)
      for (std::size_t i : omega) {
        const Point x = g.point(i);
        const double ph = tb.value(g.t(k), x, n);
        const auto dph = tb.gradient(g.t(k), x, n);
        ph2 += (ph * ph + dph[0] * dph[0] + dph[1] * dph[1] + dph[2] * dph[2]) * meas;
        if (ph == 0.0 && dph[0] == 0.0 && dph[1] == 0.0 && dph[2] == 0.0) continue;
        Eigen::Vector2d gv(centered(v, k, i, 0), n == 2 ? centered(v, k, i, 1) : 0.0);
        Eigen::Vector2d gp(dph[1], dph[2]);
        Mat2 sg = sigma.at(i);
        if (n == 1) sg(0, 1) = sg(1, 0) = sg(1, 1) = 0.0;
        integral += (v(k, i) * dph[0] - gv.dot(sg * gp)) * meas;
      }
    const double denom = vn * std::sqrt(ph2);
    res.residuals.push_back(denom > 0.0 ? std::abs(integral) / denom : 0.0);
    res.max_residual = std::max(res.max_residual, res.residuals.back());
  }
  return res;
}

OneMinusSResult check_one_minus_s_relation(const SpaceTimeField& v, const SpaceTimeField& u, double s,
                                           const ConductivityField& sigma, SymbolPadding pad) {
  if (!sigma.is_identity()) throw InvalidArgument("check_one_minus_s_relation: requires sigma = Id");
  const double nu = u.norm();
  OneMinusSResult r;
  if (nu == 0.0) return r;
  const SpaceTimeField hv = apply_symbol(v, 1.0 - s, pad);
  const double d = frac_constants(1.0 - s).d;
  r.discrepancy = (hv - d * u).norm() / nu;
  r.literal = (hv + d * u).norm() / nu;
  return r;
}

SpaceTimeField outline_integral(const ExtensionField& utilde) {
  // -y^{1-2s} d_y u~ is the conjugate transform of u~ read as an order-(1-s') field with s' = 1 - s.
  const ExtensionField minus_flux = conjugate_transform(utilde, 1.0 - utilde.order());
  return minus_flux.plane_field(0) - minus_flux.plane_field(utilde.grid().ny());
}

double l2h1_norm(const SpaceTimeField& v) {
  const Grid& g = v.grid();
  const double meas = g.dt() * g.cell_volume();
  double acc = 0.0;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      acc += v(k, i) * v(k, i) * meas;
      for (int a = 0; a < g.dim(); ++a) {
        const double d = centered(v, k, i, a);
        acc += d * d * meas;
      }
    }
  return std::sqrt(acc);
}

}  // namespace fpara
