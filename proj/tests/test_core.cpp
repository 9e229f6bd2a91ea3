#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "fpara/conductivity.hpp"
#include "fpara/diagnostics.hpp"
#include "fpara/fourier.hpp"
#include "fpara/grid.hpp"
#include "fpara/quadrature.hpp"

using namespace fpara;

TEST_CASE("grid coordinates follow the lattice conventions") {
  GridSpec s;
  s.L = 1.0;
  s.Nx = 8;
  s.T = 1.0;
  s.Nt = 4;
  s.Ymax = 1.0;
  s.Ny = 4;
  const Grid g = build_grid(s);
  const double xs[8] = {-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75};
  for (int i = 0; i < 8; ++i) CHECK(g.x(i) == doctest::Approx(xs[i]).epsilon(1e-15));
  const double ts[4] = {-1.0, -0.5, 0.0, 0.5};
  for (int k = 0; k < 4; ++k) CHECK(g.t(k) == doctest::Approx(ts[k]).epsilon(1e-15));
  const double ys[5] = {0.0, 1.0 / 16, 0.25, 9.0 / 16, 1.0};
  for (int j = 0; j < 5; ++j) CHECK(g.y(j) == doctest::Approx(ys[j]).epsilon(1e-15));
  CHECK(g.x_index(0.26) == 5);
  CHECK(g.t_index(0.0) == 2);
}

TEST_CASE("grid rejects invalid parameters") {
  GridSpec s;
  s.n = 3;
  CHECK_THROWS_AS(build_grid(s), InvalidArgument);
  s.n = 1;
  s.Nx = 2;
  CHECK_THROWS_AS(build_grid(s), InvalidArgument);
  s.Nx = 16;
  s.grade = 0.5;
  CHECK_THROWS_AS(build_grid(s), InvalidArgument);
}

TEST_CASE("default Ymax and refinement") {
  GridSpec s;
  s.T = 2.0;
  CHECK(s.y_max() == doctest::Approx(20.0));
  const GridSpec r = s.refined(2);
  CHECK(r.Nx == 2 * s.Nx);
  CHECK(r.Nt == 2 * s.Nt);
  CHECK(r.Ny == 2 * s.Ny);
}

TEST_CASE("flat and multi indices are inverse") {
  GridSpec s;
  s.n = 2;
  s.Nx = 8;
  const Grid g(s);
  for (std::size_t i = 0; i < g.spatial_size(); ++i) CHECK(g.flatten(g.unflatten(i)) == i);
  // Axis 0 varies slowest.
  CHECK(g.unflatten(9)[0] == 1);
  CHECK(g.unflatten(9)[1] == 1);
}

TEST_CASE("causal fields vanish at the first time sample") {
  GridSpec s;
  s.Nx = 8;
  s.Nt = 8;
  const Grid g(s);
  const SpaceTimeField u = SpaceTimeField::sample(g, [](double, Point) { return 1.0; });
  for (std::size_t i = 0; i < g.spatial_size(); ++i) CHECK(u(0, i) == 0.0);
  CHECK(u(1, 0) == 1.0);
  const SpaceTimeField p = SpaceTimeField::sample(g, [](double, Point) { return 1.0; }, TimeSupport::periodic);
  CHECK(p(0, 0) == 1.0);
}

TEST_CASE("field norm uses the lattice measure") {
  GridSpec s;
  s.L = 2.0;
  s.Nx = 16;
  s.T = 1.0;
  s.Nt = 8;
  const Grid g(s);
  const SpaceTimeField u = SpaceTimeField::sample(g, [](double, Point) { return 1.0; }, TimeSupport::periodic);
  // |[-1,1) x [-2,2)| = 8.
  CHECK(u.norm() == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));
  CHECK(relative_l2(u, u, u) == 0.0);
}

TEST_CASE("extension field rejects orders outside (0,1)") {
  const Grid g(GridSpec{});
  CHECK_THROWS_AS(ExtensionField(g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ExtensionField(g, 1.0), InvalidArgument);
  CHECK_NOTHROW(ExtensionField(g, 0.3));
}

TEST_CASE("domain masks") {
  GridSpec s;
  s.L = 4.0;
  s.Nx = 32;
  const Grid g(s);
  const DomainMasks m(g, Box{{-1.0, 0.0}, {1.0, 0.0}}, Box{{1.5, 0.0}, {2.5, 0.0}});
  CHECK(m.boundary().size() == 2);
  CHECK(m.omega_nodes().size() == 7);
  CHECK(m.w_nodes().size() == 5);
  for (const auto& b : m.boundary()) CHECK(std::abs(b.normal[0]) == 1.0);
  // Faces off the lattice, overlap with Omega, and W too close are all rejected.
  CHECK_THROWS_AS(DomainMasks(g, Box{{-1.1, 0.0}, {1.0, 0.0}}, Box{{1.5, 0.0}, {2.5, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(DomainMasks(g, Box{{-1.0, 0.0}, {1.0, 0.0}}, Box{{0.5, 0.0}, {2.5, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(DomainMasks(g, Box{{-1.0, 0.0}, {1.0, 0.0}}, Box{{1.25, 0.0}, {2.5, 0.0}}), InvalidArgument);
}

TEST_CASE("product rule integrates reference functions") {
  std::vector<double> y(201);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = std::pow(j / 200.0, 2.0);
  std::vector<double> one(y.size(), 1.0);
  // Non-decaying integrands raise the tail warning.
  int warnings = 0;
  const WarningHandler old = set_warning_handler([&](const std::string&) { ++warnings; });
  CHECK(weighted_y_integral(y, one, 0.0).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(weighted_y_integral(y, one, -0.5).value == doctest::Approx(2.0).epsilon(1e-13));
  // Exact for piecewise-linear f.
  std::vector<double> lin(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) lin[j] = 3.0 * y[j] - 1.0;
  CHECK(weighted_y_integral(y, lin, 0.4).value ==
        doctest::Approx(3.0 / 2.4 - 1.0 / 1.4).epsilon(1e-13));
  set_warning_handler(old);
  CHECK(warnings == 3);

  std::vector<double> ye(4001), fe(4001);
  for (std::size_t j = 0; j < ye.size(); ++j) {
    ye[j] = 40.0 * std::pow(j / 4000.0, 2.0);
    fe[j] = std::exp(-ye[j]);
  }
  CHECK(weighted_y_integral(ye, fe, -0.5).value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("upper integrals against the incomplete gamma function") {
  std::vector<double> y(3001), f(3001);
  for (std::size_t j = 0; j < y.size(); ++j) {
    y[j] = 40.0 * std::pow(j / 3000.0, 2.0);
    f[j] = std::exp(-y[j]);
  }
  const double a = 0.3;
  const auto up = upper_weighted_integrals(y, f, a);
  for (std::size_t j : {0u, 500u, 1000u, 1500u}) {
    const double exact = boost::math::tgamma(1.0 + a, y[j]);
    CHECK(up[j] == doctest::Approx(exact).epsilon(1e-5));
  }
  CHECK(up.back() == 0.0);
}

TEST_CASE("tail estimate of a power law") {
  // f = y^{-3}, a = 0: int_Y^inf y^{-3} dy = 1 / (2 Y^2).
  std::vector<double> y{1.0, 2.0, 3.0, 4.0}, f;
  for (double v : y) f.push_back(std::pow(v, -3.0));
  CHECK(weighted_tail_estimate(y, f, 0.0) == doctest::Approx(1.0 / 32.0).epsilon(1e-10));
}

TEST_CASE("Gauss-Legendre and Hurwitz zeta") {
  const GaussRule r = gauss_legendre(8);
  double sum = 0.0, x6 = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    sum += r.weights[i];
    x6 += r.weights[i] * std::pow(r.nodes[i], 6);
  }
  CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x6 == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
  CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-12));
  CHECK(hurwitz_zeta(1.5, 1.0) == doctest::Approx(boost::math::zeta(1.5)).epsilon(1e-12));
  // zeta(s, 1/2) = (2^s - 1) zeta(s), then drop the first two terms.
  CHECK(hurwitz_zeta(3.0, 2.5) ==
        doctest::Approx(7.0 * boost::math::zeta(3.0) - 8.0 - std::pow(1.5, -3.0)).epsilon(1e-12));
}

TEST_CASE("unitary space-time transform") {
  GridSpec s;
  s.n = 2;
  s.Nx = 8;
  s.Nt = 16;
  const Grid g(s);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (double& a : v) a = nd(rng);
  const SpaceTimeField u(g, v, TimeSupport::periodic);
  const SpectralArray a = fourier_forward(u);
  double e1 = 0.0, e2 = 0.0;
  for (double x : u.values()) e1 += x * x;
  for (const cplx& z : a.values) e2 += std::norm(z);
  CHECK(e2 == doctest::Approx(e1).epsilon(1e-12));
  double imag = 1.0;
  const SpaceTimeField back = fourier_inverse(a, g, TimeSupport::periodic, &imag);
  CHECK(relative_l2(back, u, u) < 1e-13);
  CHECK(imag < 1e-13);
}

TEST_CASE("angular frequencies") {
  CHECK(angular_frequency(0, 8, 0.5) == 0.0);
  CHECK(angular_frequency(1, 8, 0.5) == doctest::Approx(2 * std::numbers::pi / 4.0));
  CHECK(angular_frequency(4, 8, 0.5) > 0.0);
  CHECK(angular_frequency(7, 8, 0.5) == doctest::Approx(-2 * std::numbers::pi / 4.0));
}

TEST_CASE("conductivity families") {
  GridSpec s;
  s.n = 2;
  s.L = 2.0;
  s.Nx = 16;
  const Grid g(s);
  Mat2 M;
  M << 0.6, 0.3, 0.3, 0.2;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.0, 0.0}, 0.9, M);
  CHECK_FALSE(c.is_constant());
  CHECK((c.eval({0.0, 0.0}) - (Mat2::Identity() + M)).norm() < 1e-14);
  CHECK((c.eval({0.95, 0.0}) - Mat2::Identity()).norm() == 0.0);
  CHECK(c.ellipticity() > 0.0);
  CHECK(ConductivityField::identity(g).is_identity());
  CHECK(c.hash() != ConductivityField::identity(g).hash());
  Mat2 bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS(ConductivityField::constant(g, bad).require_ellipticity(0.1));
}
