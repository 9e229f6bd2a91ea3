#include "fpara/pushforward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpara/diagnostics.hpp"

namespace fpara {

namespace {

double cubic_bump(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  return q * q * q;
}

// (1 - z^2)^2, so that beta'(z) = -6 z q2(z).
double cubic_bump_q2(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  return q * q;
}

double dist(Point a, Point b, int n) {
  double r = 0.0;
  for (int d = 0; d < n; ++d) r = std::max(r, std::abs(a[d] - b[d]));
  return r;
}

}  // namespace

DiffeoMap::DiffeoMap(int n, Map phi, Jacobian dphi, std::string name)
    : n_(n), phi_(std::move(phi)), dphi_(std::move(dphi)), name_(std::move(name)) {
  if (n != 1 && n != 2) throw InvalidArgument("DiffeoMap: dimension must be 1 or 2");
}

DiffeoMap DiffeoMap::identity(int n) {
  return DiffeoMap(
      n, [](Point x) { return x; }, [](Point) { return Mat2::Identity(); }, "identity");
}

DiffeoMap DiffeoMap::bump_stretch_1d(double center, double radius, double eps) {
  if (!(radius > 0.0)) throw InvalidArgument("bump_stretch_1d: radius must be positive");
  if (!(std::abs(eps) * 1.7174 < 1.0)) throw InvalidArgument("bump_stretch_1d: |eps| too large for a monotone map");
  std::ostringstream os;
  os << "bump_stretch_1d(c=" << center << ",r=" << radius << ",eps=" << eps << ")";
  return DiffeoMap(
      1,
      [=](Point x) {
        Point y = x;
        y[0] = x[0] + eps * radius * cubic_bump((x[0] - center) / radius);
        return y;
      },
      [=](Point x) {
        const double z = (x[0] - center) / radius;
        Mat2 J = Mat2::Identity();
        J(0, 0) = 1.0 - 6.0 * eps * z * cubic_bump_q2(z);
        return J;
      },
      os.str());
}

DiffeoMap DiffeoMap::radial_bump_2d(Point center, double radius, double eps) {
  if (!(radius > 0.0)) throw InvalidArgument("radial_bump_2d: radius must be positive");
  // The radial profile rho (1 + eps beta(rho / r)) has slope 1 + eps (1 - z^2)^2 (1 - 7 z^2) >= 1 - 0.654 eps.
  if (!(eps > -1.0 && eps * 0.6531 < 1.0)) throw InvalidArgument("radial_bump_2d: eps outside the monotone range");
  std::ostringstream os;
  os << "radial_bump_2d(c=(" << center[0] << "," << center[1] << "),r=" << radius << ",eps=" << eps << ")";
  return DiffeoMap(
      2,
      [=](Point x) {
        const double dx = x[0] - center[0], dy = x[1] - center[1];
        const double f = 1.0 + eps * cubic_bump(std::hypot(dx, dy) / radius);
        return Point{center[0] + f * dx, center[1] + f * dy};
      },
      [=](Point x) {
        const Eigen::Vector2d d(x[0] - center[0], x[1] - center[1]);
        const double z = d.norm() / radius;
        return Mat2((1.0 + eps * cubic_bump(z)) * Mat2::Identity() -
                    6.0 * eps * cubic_bump_q2(z) / (radius * radius) * d * d.transpose());
      },
      os.str());
}

DiffeoMap DiffeoMap::compose(const DiffeoMap& outer, const DiffeoMap& inner) {
  if (outer.dim() != inner.dim()) throw InvalidArgument("DiffeoMap::compose: dimension mismatch");
  return DiffeoMap(
      inner.dim(), [outer, inner](Point x) { return outer(inner(x)); },
      [outer, inner](Point x) { return Mat2(outer.jacobian(inner(x)) * inner.jacobian(x)); },
      outer.name() + " o " + inner.name());
}

Point DiffeoMap::operator()(Point x) const {
  Point y = phi_(x);
  if (n_ == 1) y[1] = x[1];
  return y;
}

Mat2 DiffeoMap::jacobian(Point x) const {
  Mat2 J = dphi_(x);
  if (n_ == 1) {
    const double a = J(0, 0);
    J = Mat2::Identity();
    J(0, 0) = a;
  }
  return J;
}

double DiffeoMap::det(Point x) const { return n_ == 1 ? jacobian(x)(0, 0) : jacobian(x).determinant(); }

Point DiffeoMap::inverse(Point y) const {
  Point x = y;
  const double tol = 1e-13 * std::max(1.0, dist(y, Point{0.0, 0.0}, n_));
  auto residual = [&](Point p) {
    const Point fp = (*this)(p);
    return Eigen::Vector2d(fp[0] - y[0], n_ == 2 ? fp[1] - y[1] : 0.0);
  };
  Eigen::Vector2d r = residual(x);
  for (int it = 0; it < 100; ++it) {
    if (r.lpNorm<Eigen::Infinity>() <= tol) return x;
    const Eigen::Vector2d step = jacobian(x).partialPivLu().solve(r);
    // Backtrack until the residual decreases; plain Newton overshoots where DPhi is nearly singular.
    double lam = 1.0;
    for (int b = 0; b < 40; ++b, lam *= 0.5) {
      Point trial = x;
      trial[0] -= lam * step[0];
      if (n_ == 2) trial[1] -= lam * step[1];
      const Eigen::Vector2d rt = residual(trial);
      if (rt.norm() < r.norm() || b == 39) {
        x = trial;
        r = rt;
        break;
      }
    }
  }
  if (r.lpNorm<Eigen::Infinity>() <= tol) return x;
  std::ostringstream os;
  os << "DiffeoMap::inverse: Newton did not converge at (" << y[0] << "," << y[1] << ") for " << name_;
  throw NumericalFailure(os.str());
}

void DiffeoMap::validate(const Grid& grid) const {
  if (grid.dim() != n_) throw InvalidArgument("DiffeoMap::validate: grid dimension differs");
  for (std::size_t i = 0; i < grid.spatial_size(); ++i) {
    const Point x = grid.point(i);
    const double d = det(x);
    if (!(d > 0.0)) {
      std::ostringstream os;
      os << "DiffeoMap " << name_ << ": det DPhi = " << d << " at node " << i;
      throw InvalidArgument(os.str());
    }
    const double err = dist(inverse((*this)(x)), x, n_);
    if (err > 1e-8) {
      std::ostringstream os;
      os << "DiffeoMap " << name_ << ": inverse round trip error " << err << " at node " << i;
      throw NumericalFailure(os.str());
    }
  }
}

double DiffeoMap::boundary_displacement(const Grid& grid, const DomainMasks& masks) const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid.spatial_size(); ++i) {
    if (masks.in_omega(i)) continue;
    const Point x = grid.point(i);
    m = std::max(m, dist((*this)(x), x, n_));
  }
  return m;
}

ConductivityField pushforward_sigma(const ConductivityField& sigma, const DiffeoMap& phi) {
  const Grid& g = sigma.grid();
  if (phi.dim() != g.dim()) throw InvalidArgument("pushforward_sigma: dimension mismatch");
  const double L = g.spec().L;
  auto f = [sigma, phi, L](Point y) -> Mat2 {
    const Point x = phi.inverse(y);
    for (int d = 0; d < phi.dim(); ++d)
      if (x[d] < -L - 1e-12 || x[d] > L + 1e-12) throw InvalidArgument("pushforward_sigma: preimage outside the box");
    const Mat2 J = phi.jacobian(x);
    const Mat2 s = sigma.eval(x);
    if (phi.dim() == 1) {
      Mat2 r = Mat2::Identity();
      r(0, 0) = s(0, 0) * J(0, 0);
      return r;
    }
    const Mat2 r = J * s * J.transpose() / J.determinant();
    return Mat2(0.5 * (r + r.transpose()));
  };
  ConductivityField out = ConductivityField::from_function(g, f, "push[" + phi.name() + "](" + sigma.name() + ")");
  if (!(out.ellipticity() > 0.0)) throw NumericalFailure("pushforward_sigma: result is not positive definite");
  return out;
}

std::vector<double> pushforward_density(const Grid& grid, const DiffeoMap& phi) {
  std::vector<double> rho(grid.spatial_size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 1.0 / phi.det(phi.inverse(grid.point(i)));
  return rho;
}

SpaceTimeField solve_transformed(const ConductivityField& sigma, const DiffeoMap& phi, const DomainMasks& masks,
                                 const BoundarySeries& g, LocalOptions opts) {
  const double disp = phi.boundary_displacement(sigma.grid(), masks);
  if (disp > 1e-12) throw InvalidArgument("solve_transformed: phi must fix the boundary of Omega");
  LocalSolver solver(pushforward_sigma(sigma, phi), masks, pushforward_density(sigma.grid(), phi), opts);
  return solver.solve(g);
}

SpaceTimeField transport(const SpaceTimeField& v, const DiffeoMap& phi) {
  const Grid& g = v.grid();
  const int n = g.dim(), Nx = g.nx();
  const double L = g.spec().L, h = g.dx();
  struct Stencil {
    std::array<std::size_t, 4> idx{};
    std::array<double, 4> w{};
  };
  std::vector<Stencil> st(g.spatial_size());
  for (std::size_t i = 0; i < st.size(); ++i) {
    const Point x = phi.inverse(g.point(i));
    std::array<int, 2> i0{0, 0};
    std::array<double, 2> th{0.0, 0.0};
    for (int a = 0; a < n; ++a) {
      const double r = std::clamp((x[a] + L) / h, 0.0, Nx - 1.0);
      i0[a] = std::min(static_cast<int>(std::floor(r)), Nx - 2);
      th[a] = r - i0[a];
    }
    for (int c = 0; c < (n == 1 ? 2 : 4); ++c) {
      const int da = c & 1, db = c >> 1;
      std::array<int, 2> m{i0[0] + da, n == 2 ? i0[1] + db : 0};
      st[i].idx[c] = g.flatten(m);
      st[i].w[c] = (da ? th[0] : 1.0 - th[0]) * (n == 2 ? (db ? th[1] : 1.0 - th[1]) : 1.0);
    }
  }
  SpaceTimeField out(g, v.support());
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i = 0; i < st.size(); ++i) {
      double acc = 0.0;
      for (int c = 0; c < (n == 1 ? 2 : 4); ++c) acc += st[i].w[c] * v(k, st[i].idx[c]);
      out(k, i) = acc;
    }
  return out;
}

InvarianceResult check_cauchy_invariance(const ConductivityField& sigma, const DiffeoMap& phi,
                                         const DomainMasks& masks, bool allow_boundary_motion, LocalOptions opts) {
  const Grid& g = sigma.grid();
  phi.validate(g);
  InvarianceResult res;
  res.boundary_displacement = phi.boundary_displacement(g, masks);
  if (!allow_boundary_motion && res.boundary_displacement > 1e-12)
    throw InvalidArgument("check_cauchy_invariance: phi moves the boundary of Omega or the exterior");
  LocalSolver plain(sigma, masks, {}, opts);
  LocalSolver pushed(pushforward_sigma(sigma, phi), masks, pushforward_density(g, phi), opts);
  res.dn = assemble_local_dn(plain);
  res.dn_pushed = assemble_local_dn(pushed);
  const double ref = res.dn.entries.norm();
  res.discrepancy = ref > 0.0 ? (res.dn_pushed.entries - res.dn.entries).norm() / ref : 0.0;
  return res;
}

}  // namespace fpara
