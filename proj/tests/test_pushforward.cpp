#include <doctest.h>

#include <cmath>
#include <random>

#include "fpara/diagnostics.hpp"
#include "fpara/dnmap.hpp"
#include "fpara/pushforward.hpp"

using namespace fpara;

namespace {

Grid grid_1d(int Nx = 64) {
  GridSpec s;
  s.L = 4.0;
  s.Nx = Nx;
  s.Nt = 16;
  return Grid(s);
}

Grid grid_2d(int Nx = 24) {
  GridSpec s;
  s.n = 2;
  s.L = 3.0;
  s.Nx = Nx;
  s.Nt = 16;
  return Grid(s);
}

// Preimage by bisection, for monotone 1D maps.
double bisect(const DiffeoMap& phi, double y) {
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi({mid, 0.0})[0] < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Mat2 fd_jacobian(const DiffeoMap& phi, Point x) {
  const double h = 1e-6;
  Mat2 J;
  for (int j = 0; j < 2; ++j) {
    Point p = x, m = x;
    p[j] += h;
    m[j] -= h;
    const Point a = phi(p), b = phi(m);
    for (int i = 0; i < 2; ++i) J(i, j) = (a[i] - b[i]) / (2 * h);
  }
  return J;
}

std::vector<DiffeoMap> maps_2d() {
  return {DiffeoMap::identity(2), DiffeoMap::radial_bump_2d({0.1, -0.1}, 0.7, 0.3),
          DiffeoMap::radial_bump_2d({0.0, 0.2}, 0.6, -0.4), DiffeoMap::radial_bump_2d({-0.2, 0.0}, 0.5, 0.8),
          DiffeoMap::compose(DiffeoMap::radial_bump_2d({0.1, 0.1}, 0.5, 0.3),
                             DiffeoMap::radial_bump_2d({-0.1, 0.0}, 0.6, -0.2))};
}

}  // namespace

TEST_CASE("closed-form Jacobians match finite differences") {
  const DiffeoMap a = DiffeoMap::bump_stretch_1d(0.1, 0.8, 0.4);
  for (double x : {-0.5, 0.0, 0.3, 0.85}) CHECK(a.jacobian({x, 0.0})(0, 0) == doctest::Approx(fd_jacobian(a, {x, 0.0})(0, 0)).epsilon(1e-7));
  for (const DiffeoMap& m : maps_2d())
    for (Point x : {Point{0.2, 0.1}, Point{-0.3, 0.4}, Point{0.5, -0.2}}) {
      CHECK((m.jacobian(x) - fd_jacobian(m, x)).norm() < 1e-7);
      CHECK(m.det(x) == doctest::Approx(m.jacobian(x).determinant()).epsilon(1e-14));
    }
}

TEST_CASE("maps outside the admissible range are rejected") {
  CHECK_THROWS_AS(DiffeoMap::bump_stretch_1d(0.0, 0.5, 0.6), InvalidArgument);
  CHECK_THROWS_AS(DiffeoMap::radial_bump_2d({0.0, 0.0}, 0.5, -1.0), InvalidArgument);
  CHECK_THROWS_AS(DiffeoMap::radial_bump_2d({0.0, 0.0}, 0.5, 1.6), InvalidArgument);
}

TEST_CASE("inverse and validation") {
  const Grid g = grid_2d();
  for (const DiffeoMap& m : maps_2d()) {
    CHECK_NOTHROW(m.validate(g));
    for (Point y : {Point{0.15, -0.05}, Point{-0.4, 0.3}}) {
      const Point x = m.inverse(y), back = m(x);
      CHECK(std::hypot(back[0] - y[0], back[1] - y[1]) < 1e-12);
    }
  }
}

TEST_CASE("identity map leaves sigma and capacity unchanged") {
  const Grid g = grid_2d();
  Mat2 M;
  M << 0.6, 0.3, 0.3, 0.2;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.0, 0.0}, 0.9, M);
  const ConductivityField p = pushforward_sigma(c, DiffeoMap::identity(2));
  for (std::size_t i = 0; i < g.spatial_size(); ++i) CHECK((p.at(i) - c.at(i)).norm() < 1e-14);
  for (double r : pushforward_density(g, DiffeoMap::identity(2))) CHECK(r == 1.0);
}

TEST_CASE("one-dimensional pushforward is sigma times the stretch at the preimage") {
  const Grid g = grid_1d();
  Mat2 M = Mat2::Zero();
  M(0, 0) = 0.7;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.2, 0.0}, 1.0, M);
  const DiffeoMap phi = DiffeoMap::bump_stretch_1d(0.0, 0.8, 0.5);
  const ConductivityField p = pushforward_sigma(c, phi);
  const auto rho = pushforward_density(g, phi);
  for (std::size_t i = 0; i < g.spatial_size(); ++i) {
    const double x = bisect(phi, g.x(static_cast<int>(i)));
    const double d = fd_jacobian(phi, {x, 0.0})(0, 0);
    CHECK(p.at(i)(0, 0) == doctest::Approx(c.eval({x, 0.0})(0, 0) * d).epsilon(1e-7));
    CHECK(rho[i] == doctest::Approx(1.0 / d).epsilon(1e-7));
  }
}

TEST_CASE("two-dimensional pushforward formula") {
  const Grid g = grid_2d();
  Mat2 M;
  M << 0.6, 0.3, 0.3, 0.2;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.0, 0.0}, 0.9, M);
  const DiffeoMap phi = DiffeoMap::radial_bump_2d({0.1, -0.1}, 0.7, 0.3);
  const ConductivityField p = pushforward_sigma(c, phi);
  for (std::size_t i = 0; i < g.spatial_size(); i += 7) {
    const Point x = phi.inverse(g.point(i));
    const Mat2 J = fd_jacobian(phi, x);
    const Mat2 ref = J * c.eval(x) * J.transpose() / J.determinant();
    CHECK((p.at(i) - ref).norm() < 1e-6);
  }
}

TEST_CASE("pushforward composes") {
  const Grid g = grid_2d();
  Mat2 M;
  M << 0.5, -0.2, -0.2, 0.4;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.1, 0.0}, 0.8, M);
  const DiffeoMap a = DiffeoMap::radial_bump_2d({0.1, 0.1}, 0.5, 0.3);
  const DiffeoMap b = DiffeoMap::radial_bump_2d({-0.1, 0.0}, 0.6, -0.2);
  const ConductivityField once = pushforward_sigma(c, DiffeoMap::compose(a, b));
  const ConductivityField twice = pushforward_sigma(pushforward_sigma(c, b), a);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.spatial_size(); ++i) worst = std::max(worst, (once.at(i) - twice.at(i)).norm());
  CHECK(worst < 1e-6);
}

TEST_CASE("capacity integrates to the volume of Omega") {
  for (int Nx : {256, 512}) {
    const Grid g = grid_1d(Nx);
    const auto rho = pushforward_density(g, DiffeoMap::bump_stretch_1d(0.0, 0.6, 0.3));
    // Trapezoid over [-1, 1].
    double m = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
      const double x = g.x(i);
      if (x < -1.0 - 1e-12 || x > 1.0 + 1e-12) continue;
      m += rho[static_cast<std::size_t>(i)] * g.dx() * ((std::abs(std::abs(x) - 1.0) < 1e-12) ? 0.5 : 1.0);
    }
    CHECK(m == doctest::Approx(2.0).epsilon(1e-4));
  }
}

TEST_CASE("pushforward stays uniformly elliptic") {
  const Grid g = grid_2d();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  int checked = 0;
  for (int r = 0; r < 10; ++r) {
    Eigen::Matrix2d B;
    B << ud(rng), ud(rng), ud(rng), ud(rng);
    const Mat2 S = B * B.transpose() + 0.2 * Mat2::Identity();
    const ConductivityField c = ConductivityField::constant(g, S);
    for (const DiffeoMap& m : maps_2d()) {
      const ConductivityField p = pushforward_sigma(c, m);
      CHECK(p.ellipticity() > 0.0);
      for (std::size_t i = 0; i < g.spatial_size(); i += 11) CHECK((p.at(i) - p.at(i).transpose()).norm() < 1e-14);
      ++checked;
    }
  }
  CHECK(checked == 50);
}

TEST_CASE("transformed solve with the identity map is the plain solve") {
  const Grid g = grid_1d(32);
  const DomainMasks m(g, Box{{-1.0, 0.0}, {1.0, 0.0}}, Box{{2.0, 0.0}, {3.0, 0.0}});
  const ConductivityField c = ConductivityField::identity(g);
  BoundarySeries b = BoundarySeries::Random(g.nt(), 2);
  b.row(0).setZero();
  const SpaceTimeField a = solve_local(c, m, b), t = solve_transformed(c, DiffeoMap::identity(1), m, b);
  CHECK(relative_l2(t, a, a) < 1e-14);
}

TEST_CASE("transport pulls back by the inverse map") {
  const Grid g = grid_2d();
  const SpaceTimeField v = SpaceTimeField::sample(g, [](double t, Point x) { return t + 2 * x[0] - x[1]; });
  const DiffeoMap phi = DiffeoMap::radial_bump_2d({0.1, -0.1}, 0.7, 0.3);
  const SpaceTimeField w = transport(v, phi);
  CHECK(relative_l2(transport(v, DiffeoMap::identity(2)), v, v) == 0.0);
  // Multilinear interpolation is exact on affine fields.
  double worst = 0.0;
  for (int k = 1; k < g.nt(); ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      const Point x = phi.inverse(g.point(i));
      worst = std::max(worst, std::abs(w(k, i) - (g.t(k) + 2 * x[0] - x[1])));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("invariance check requires a map that fixes the boundary") {
  const Grid g = grid_1d(32);
  const DomainMasks m(g, Box{{-1.0, 0.0}, {1.0, 0.0}}, Box{{2.0, 0.0}, {3.0, 0.0}});
  const ConductivityField c = ConductivityField::identity(g);
  const DiffeoMap inside = DiffeoMap::bump_stretch_1d(0.0, 0.6, 0.3);
  const DiffeoMap moving = DiffeoMap::bump_stretch_1d(1.0, 0.8, 0.5);
  CHECK(inside.boundary_displacement(g, m) == 0.0);
  CHECK(moving.boundary_displacement(g, m) > 0.1);
  CHECK_THROWS_AS(check_cauchy_invariance(c, moving, m), InvalidArgument);
  const InvarianceResult r = check_cauchy_invariance(c, moving, m, true);
  CHECK(r.boundary_displacement > 0.1);
  CHECK(std::isfinite(r.discrepancy));
}
