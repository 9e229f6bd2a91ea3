#include "fpara/extension.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpara/diagnostics.hpp"
#include "fpara/quadrature.hpp"
#include "fpara/semigroup.hpp"

namespace fpara {

namespace {

SpaceTimeField from_rows(const RowMatrix& r, const Grid& g) {
  return SpaceTimeField(g, std::vector<double>(r.data(), r.data() + r.size()));
}

// Derivative weights of the 3-point stencil on nodes (a, b, c) evaluated at b.
std::array<double, 3> centered_weights(double a, double b, double c) {
  const double hm = b - a, hp = c - b;
  return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

}  // namespace

ExtensionField extend_kernel(const SpaceTimeField& u, double s, const HeatKernel& kernel, const TauQuadrature& quad) {
  if (!u.causal()) throw InvalidArgument("extend_kernel: the field must be causal");
  if (!(u.grid() == kernel.grid())) throw InvalidArgument("extend_kernel: kernel grid differs from field grid");
  const Grid& g = u.grid();
  ExtensionField ext(g, s);
  ext.set_plane(0, u);
  if (u.max_abs() == 0.0) return ext;
  const Eigen::MatrixXcd U = kernel.basis().to_modes(as_matrix(u));
  for (int j = 1; j <= g.ny(); ++j) {
    const Eigen::MatrixXd C = extension_coefficients(kernel, s, g.y(j), quad);
    ext.set_plane(j, from_rows(kernel.basis().from_modes(causal_convolve(C, U)), g));
  }
  return ext;
}

ExtensionField extend_pde(const SpaceTimeField& u, double s, const HeatKernel& kernel, const PdeOptions& opts) {
  if (!u.causal()) throw InvalidArgument("extend_pde: the field must be causal");
  if (!(u.grid() == kernel.grid())) throw InvalidArgument("extend_pde: kernel grid differs from field grid");
  if (opts.substeps < 1) throw InvalidArgument("extend_pde: substeps must be positive");
  const Grid& g = u.grid();
  const int N = g.ny(), Nt = g.nt();
  const auto y = g.y_coords();
  ExtensionField ext(g, s);
  ext.set_plane(0, u);
  if (u.max_abs() == 0.0) return ext;

  // Finite volumes: node j owns [y_{j-1/2}, y_{j+1/2}]; faces carry 1 / int y^{2s-1}.
  const double p = 1.0 - 2.0 * s;
  std::vector<double> mass(N + 1, 0.0), cond(N, 0.0);
  auto wint = [p](double a, double b) { return (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0); };
  for (int j = 1; j <= N; ++j) {
    const double lo = 0.5 * (y[j - 1] + y[j]);
    const double hi = j < N ? 0.5 * (y[j] + y[j + 1]) : y[N];
    mass[j] = wint(lo, hi);
  }
  for (int j = 0; j < N; ++j) cond[j] = 2.0 * s / (std::pow(y[j + 1], 2.0 * s) - std::pow(y[j], 2.0 * s));

  const Eigen::MatrixXcd U = kernel.basis().to_modes(as_matrix(u));
  const Eigen::VectorXd& mu = kernel.basis().eigenvalues();
  const Eigen::Index M = mu.size();
  std::vector<Eigen::MatrixXcd> out(N + 1, Eigen::MatrixXcd::Zero(Nt, M));
  const double h = g.dt() / opts.substeps;

  // Boundary data between lattice times: causal cubic through t_{k+1} and earlier samples.
  std::vector<ShiftStencil> stencils;
  for (int sub = 1; sub <= opts.substeps; ++sub)
    stencils.push_back(causal_shift_stencil(1.0 - static_cast<double>(sub) / opts.substeps));
  std::vector<cplx> phi(N + 1), prev(N + 1), rhs(N + 1), dp(N + 1);
  // Thomas factorization of the tridiagonal system with coefficient c on the mass.
  struct Factor {
    std::vector<double> inv_pivot, upper;
  };
  auto factor = [&](double c, double m) {
    Factor f{std::vector<double>(N + 1), std::vector<double>(N + 1)};
    double prev_up = 0.0;
    for (int j = 1; j <= N; ++j) {
      const double lower = j > 1 ? -cond[j - 1] : 0.0;
      const double d = (c + m) * mass[j] + cond[j - 1] + (j < N ? cond[j] : 0.0) - lower * prev_up;
      f.inv_pivot[j] = 1.0 / d;
      f.upper[j] = j < N ? -cond[j] * f.inv_pivot[j] : 0.0;
      prev_up = f.upper[j];
    }
    return f;
  };
  auto solve = [&](const Factor& f, std::vector<cplx>& r) {
    for (int j = 1; j <= N; ++j) {
      const double lower = j > 1 ? -cond[j - 1] : 0.0;
      dp[j] = (r[j] - (j > 1 ? lower * dp[j - 1] : cplx(0.0))) * f.inv_pivot[j];
    }
    r[N] = dp[N];
    for (int j = N - 1; j >= 1; --j) r[j] = dp[j] - f.upper[j] * r[j + 1];
  };

  for (Eigen::Index k = 0; k < M; ++k) {
    const Factor fe = factor(1.0 / h, mu[k]);
    const Factor fb = factor(1.5 / h, mu[k]);
    std::fill(phi.begin(), phi.end(), cplx(0.0));
    std::fill(prev.begin(), prev.end(), cplx(0.0));
    bool first = true;
    for (int kt = 0; kt + 1 < Nt; ++kt) {
      for (int sub = 1; sub <= opts.substeps; ++sub) {
        const ShiftStencil& st = stencils[sub - 1];
        cplx gb = 0.0;
        for (int i = 0; i < 4; ++i)
          if (kt + 1 - st.offset[i] >= 0) gb += st.weight[i] * U(kt + 1 - st.offset[i], k);
        const bool be = first || opts.scheme == TimeScheme::backward_euler;
        for (int j = 1; j <= N; ++j)
          rhs[j] = be ? mass[j] * phi[j] / h : mass[j] * (4.0 * phi[j] - prev[j]) / (2.0 * h);
        rhs[1] += cond[0] * gb;
        solve(be ? fe : fb, rhs);
        prev.swap(phi);
        for (int j = 1; j <= N; ++j) phi[j] = rhs[j];
        first = false;
      }
      for (int j = 1; j <= N; ++j) out[j](kt + 1, k) = phi[j];
    }
  }
  for (int j = 1; j <= N; ++j) ext.set_plane(j, from_rows(kernel.basis().from_modes(out[j]), g));
  return ext;
}

ExtensionField conjugate_transform(const ExtensionField& u1, double s) {
  const double q = u1.order();
  if (std::abs(q - (1.0 - s)) > 1e-12) throw InvalidArgument("conjugate_transform: input order must be 1 - s");
  const Grid& g = u1.grid();
  const int N = g.ny();
  const auto y = g.y_coords();
  ExtensionField u2(g, s);
  const std::size_t P = g.size();
  for (int j = 1; j <= N; ++j) {
    // Derivative weights exact on span{1, y^{2q}, y^2}, the leading terms of u1 near y = 0.
    const std::array<int, 3> idx = j < N ? std::array<int, 3>{j - 1, j, j + 1} : std::array<int, 3>{N - 2, N - 1, N};
    Eigen::Matrix3d V;
    for (int c = 0; c < 3; ++c) {
      const double yc = y[idx[c]];
      V(0, c) = 1.0;
      V(1, c) = std::pow(yc, 2.0 * q);
      V(2, c) = yc * yc;
    }
    const Eigen::Vector3d dv(0.0, 2.0 * q * std::pow(y[j], 2.0 * q - 1.0), 2.0 * y[j]);
    const Eigen::Vector3d w = V.colPivHouseholderQr().solve(dv);
    const double f = -std::pow(y[j], 1.0 - 2.0 * q);
    auto out = u2.plane(j);
    auto p0 = u1.plane(idx[0]), p1 = u1.plane(idx[1]), p2 = u1.plane(idx[2]);
    for (std::size_t i = 0; i < P; ++i) out[i] = f * (w[0] * p0[i] + w[1] * p1[i] + w[2] * p2[i]);
  }
  // y = 0: limit of -y^{1-2q} d_y u1 from the fit u1 - u1(0) = a y^{2q} + b y^2.
  Eigen::Matrix<double, 3, 2> B;
  for (int j = 0; j < 3; ++j) {
    B(j, 0) = std::pow(y[j + 1], 2.0 * q);
    B(j, 1) = y[j + 1] * y[j + 1];
  }
  const Eigen::Matrix<double, 2, 3> pinv = (B.transpose() * B).inverse() * B.transpose();
  auto out0 = u2.plane(0);
  auto z = u1.plane(0), a1 = u1.plane(1), a2 = u1.plane(2), a3 = u1.plane(3);
  for (std::size_t i = 0; i < P; ++i) {
    const Eigen::Vector3d d(a1[i] - z[i], a2[i] - z[i], a3[i] - z[i]);
    out0[i] = -2.0 * q * pinv.row(0).dot(d);
  }
  return u2;
}

double extension_residual(const ExtensionField& f, const HeatKernel& kernel, double y_lo, double y_hi) {
  const Grid& g = f.grid();
  if (!(g == kernel.grid())) throw InvalidArgument("extension_residual: kernel grid differs from field grid");
  const double s = f.order(), p = 1.0 - 2.0 * s;
  const int N = g.ny(), Nt = g.nt();
  const auto y = g.y_coords();
  const std::size_t S = g.spatial_size();
  // Local lattice generator; the modal one would see the field's truncation at the box edge.
  const SparseMatrix K = fd_stiffness(kernel.sigma()) / g.cell_volume();
  std::vector<char> inner(S, 1);
  for (std::size_t i = 0; i < S; ++i) {
    const auto mi = g.unflatten(i);
    for (int a = 0; a < g.dim(); ++a)
      if (mi[a] == 0 || mi[a] + 1 == g.nx()) inner[i] = 0;
  }
  double r2 = 0.0, t2 = 0.0, a2 = 0.0, d2 = 0.0;
  for (int j = 1; j < N; ++j) {
    if (y[j] < y_lo || y[j] > y_hi) continue;
    const auto pl = f.plane(j), pm = f.plane(j - 1), pp = f.plane(j + 1);
    const Eigen::Map<const RowMatrix> F(pl.data(), Nt, static_cast<Eigen::Index>(S));
    const RowMatrix AF = F * K.transpose();
    // Control volume [y_{j-1/2}, y_{j+1/2}] with exact-harmonic face fluxes, as in extend_pde.
    const double lo = 0.5 * (y[j - 1] + y[j]), hi = 0.5 * (y[j] + y[j + 1]);
    const double m = (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / (p + 1.0);
    const double km = 2.0 * s / (std::pow(y[j], 2.0 * s) - std::pow(y[j - 1], 2.0 * s));
    const double kp = 2.0 * s / (std::pow(y[j + 1], 2.0 * s) - std::pow(y[j], 2.0 * s));
    const double sw = std::sqrt(m);
    for (int k = 1; k + 1 < Nt; ++k)
      for (std::size_t i = 0; i < S; ++i) {
        if (!inner[i]) continue;
        const std::size_t c = k * S + i;
        const double ty = sw * (pl[c + S] - pl[c - S]) / (2.0 * g.dt());
        const double ta = sw * AF(k, static_cast<Eigen::Index>(i));
        const double dy = sw * (kp * (pp[c] - pl[c]) - km * (pl[c] - pm[c])) / m;
        const double r = ty + ta - dy;
        r2 += r * r;
        t2 += ty * ty;
        a2 += ta * ta;
        d2 += dy * dy;
      }
  }
  const double denom = std::sqrt(t2) + std::sqrt(a2) + std::sqrt(d2);
  return denom > 0.0 ? std::sqrt(r2) / denom : 0.0;
}

double support_diameter(const SpaceTimeField& u) {
  const Grid& g = u.grid();
  const double thr = 1e-12 * u.max_abs();
  std::array<double, 2> lo{1e300, 1e300}, hi{-1e300, -1e300};
  bool any = false;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (std::abs(u(k, i)) > thr) {
        any = true;
        const auto pt = g.point(i);
        for (int a = 0; a < g.dim(); ++a) {
          lo[a] = std::min(lo[a], pt[a]);
          hi[a] = std::max(hi[a], pt[a]);
        }
      }
  if (!any) return 0.0;
  double d2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) d2 += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(d2);
}

double duality_round_trip(const ExtensionField& u1, const ExtensionField& u2) {
  const Grid& g = u1.grid();
  if (!(u2.grid() == g)) throw InvalidArgument("duality_round_trip: grids differ");
  if (std::abs(u1.order() + u2.order() - 1.0) > 1e-12)
    throw InvalidArgument("duality_round_trip: orders must add up to 1");
  const double p = 1.0 - 2.0 * u2.order();
  const auto y = g.y_coords();
  double num = 0.0, den = 0.0;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      const std::vector<double> up = upper_weighted_integrals(y, u2.column(k, i), p);
      for (int j = 0; j <= g.ny(); ++j) {
        const double d = up[j] - u1.at(j, k, i);
        num += d * d;
        den += u1.at(j, k, i) * u1.at(j, k, i);
      }
    }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

std::pair<double, double> decay_window(const SpaceTimeField& u) {
  const Grid& g = u.grid();
  const double thr = 1e-12 * u.max_abs();
  double t_last = -g.spec().T;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (std::abs(u(k, i)) > thr) t_last = g.t(k);
  const double horizon = g.spec().T - t_last;
  return {2.0 * support_diameter(u), std::min(0.5 * g.spec().y_max(), 0.5 * std::sqrt(std::max(horizon, 0.0)))};
}

DecayProfile decay_profile(const ExtensionField& field, DecayNorm norm, double y_lo, double y_hi) {
  const Grid& g = field.grid();
  const int N = g.ny(), Nt = g.nt();
  const auto y = g.y_coords();
  DecayProfile prof;
  const auto win = decay_window(field.plane_field(0));
  prof.y_lo = y_lo > 0.0 ? y_lo : win.first;
  prof.y_hi = y_hi > 0.0 ? y_hi : win.second;
  const std::size_t S = g.spatial_size();
  const int n = g.dim();
  for (int j = 1; j < N; ++j) {
    if (y[j] < prof.y_lo || y[j] > prof.y_hi) continue;
    const auto pl = field.plane(j);
    double acc = 0.0;
    const auto w = centered_weights(y[j - 1], y[j], y[j + 1]);
    const auto pm = field.plane(j - 1), pp = field.plane(j + 1);
    for (int k = 0; k < Nt; ++k) {
      double mx = 0.0;
      for (std::size_t i = 0; i < S; ++i) {
        const std::size_t c = k * S + i;
        if (norm == DecayNorm::l1t_linfx) {
          mx = std::max(mx, std::abs(pl[c]));
          continue;
        }
        const auto mi = g.unflatten(i);
        double gr2 = 0.0;
        for (int a = 0; a < n; ++a) {
          if (mi[a] == 0 || mi[a] + 1 == g.nx()) continue;
          auto mp = mi, mm = mi;
          ++mp[a];
          --mm[a];
          const double d = (pl[k * S + g.flatten(mp)] - pl[k * S + g.flatten(mm)]) / (2.0 * g.dx());
          gr2 += d * d;
        }
        const double dy = w[0] * pm[c] + w[1] * pl[c] + w[2] * pp[c];
        gr2 += dy * dy;
        mx = std::max(mx, std::sqrt(gr2));
      }
      acc += mx * g.dt();
    }
    prof.points.emplace_back(y[j], acc);
  }
  if (prof.points.size() < 3) {
    std::ostringstream os;
    os << "decay_profile: fit window [" << prof.y_lo << ", " << prof.y_hi << "] holds fewer than 3 nodes";
    throw InvalidArgument(os.str());
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(prof.points.size());
  for (const auto& [yy, v] : prof.points) {
    const double lx = std::log(yy), ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  prof.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return prof;
}

}  // namespace fpara
