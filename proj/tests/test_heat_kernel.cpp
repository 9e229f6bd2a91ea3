#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "fpara/diagnostics.hpp"
#include "fpara/heat_kernel.hpp"

using namespace fpara;

namespace {

Grid line_grid(double L = 4.0, int Nx = 64) {
  GridSpec s;
  s.L = L;
  s.Nx = Nx;
  return Grid(s);
}

Grid plane_grid(int Nx = 16) {
  GridSpec s;
  s.n = 2;
  s.L = 2.0;
  s.Nx = Nx;
  return Grid(s);
}

}  // namespace

TEST_CASE("closed-form kernel values") {
  const Mat2 id = Mat2::Identity();
  CHECK(eval_exact({0.0, 0.0}, {0.0, 0.0}, 1.0 / (4 * std::numbers::pi), id, 1) == doctest::Approx(1.0).epsilon(1e-15));
  // sigma = 4, x - z = 2, tau = 1: (4 pi)^{-1/2} / 2 * exp(-1/4).
  const Mat2 four = 4.0 * Mat2::Identity();
  CHECK(eval_exact({2.0, 0.0}, {0.0, 0.0}, 1.0, four, 1) == doctest::Approx(0.1098478).epsilon(1e-6));
  CHECK_THROWS_AS(eval_exact({0.0, 0.0}, {0.0, 0.0}, 0.0, id, 1), InvalidArgument);
}

TEST_CASE("closed-form kernel solves the heat equation") {
  Mat2 S;
  S << 0.8, 0.3, 0.3, 0.5;
  const Point x{0.3, -0.2}, z{-0.1, 0.15};
  const double tau = 0.4, h = 1e-3;
  auto p = [&](Point a, double t) { return eval_exact(a, z, t, S, 2); };
  const double dtau = (p(x, tau + h) - p(x, tau - h)) / (2 * h);
  double div = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      auto shifted = [&](double di, double dj) {
        Point a = x;
        a[i] += di;
        a[j] += dj;
        return p(a, tau);
      };
      div += S(i, j) * (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4 * h * h);
    }
  CHECK(dtau == doctest::Approx(div).epsilon(1e-5));
}

TEST_CASE("closed-form kernel has unit mass and is symmetric") {
  Mat2 S = Mat2::Identity();
  S(0, 0) = 2.5;
  double m = 0.0;
  const double h = 1e-3;
  for (int i = -20000; i <= 20000; ++i) m += eval_exact({i * h, 0.0}, {0.4, 0.0}, 0.3, S, 1) * h;
  CHECK(m == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(eval_exact({0.1, 0.0}, {0.7, 0.0}, 0.3, S, 1) == eval_exact({0.7, 0.0}, {0.1, 0.0}, 0.3, S, 1));
}

TEST_CASE("moment integral against the Gamma closed form") {
  for (auto [b, A] : {std::pair{0.5, 2.0}, std::pair{1.3, 0.7}, std::pair{0.05, 3.0}}) {
    const double exact = boost::math::tgamma(b) * std::pow(4.0 / A, b);
    CHECK(tail_integral_fb(b, A) == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("discrete propagator is a positive Markov matrix") {
  const Grid g = plane_grid();
  Mat2 M;
  M << 0.6, 0.3, 0.3, 0.2;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.0, 0.0}, 0.9, M);
  const Eigen::MatrixXd P = discrete_propagator(c, 0.2);
  CHECK(P.minCoeff() >= 0.0);
  const Eigen::VectorXd rows = P.rowwise().sum();
  CHECK((rows.array() - 1.0).abs().maxCoeff() < 1e-12);
  // Semigroup property of the matrix exponential.
  const Eigen::MatrixXd Q = discrete_propagator(c, 0.1);
  CHECK((Q * Q - P).norm() / P.norm() < 1e-12);
}

TEST_CASE("discrete kernel hygiene") {
  SUBCASE("identity") {
    const KernelHygiene h = kernel_hygiene(ConductivityField::identity(line_grid()), 0.25, 0.5);
    CHECK(h.l1_vs_exact < 1e-2);
    CHECK(h.mass < 1e-12);
    CHECK(h.symmetry < 1e-12);
    CHECK(h.chapman < 1e-10);
  }
  SUBCASE("variable") {
    const Grid g = line_grid();
    Mat2 M = Mat2::Zero();
    M(0, 0) = 0.5;
    const KernelHygiene h = kernel_hygiene(ConductivityField::bump_perturbation(g, {0.0, 0.0}, 0.9, M), 0.25, 0.5);
    CHECK(std::isnan(h.l1_vs_exact));
    CHECK(h.mass < 1e-12);
    CHECK(h.chapman < 1e-10);
  }
  SUBCASE("lattice error shrinks under refinement") {
    const double coarse = kernel_hygiene(ConductivityField::identity(line_grid(4.0, 32)), 0.25, 0.5).l1_vs_exact;
    const double fine = kernel_hygiene(ConductivityField::identity(line_grid(4.0, 64)), 0.25, 0.5).l1_vs_exact;
    CHECK(std::log2(coarse / fine) > 1.8);
  }
}

TEST_CASE("exact tables match the closed form") {
  const Grid g = line_grid(4.0, 32);
  HeatKernel K = HeatKernel::exact(g, Mat2::Identity());
  const std::vector<double> taus{0.1, 0.4};
  K.tabulate(taus);
  REQUIRE(K.tables().size() == 2);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < g.spatial_size(); i += 5)
      for (std::size_t j = 0; j < g.spatial_size(); j += 7)
        CHECK(K.tables()[m](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
              doctest::Approx(eval_exact(g.point(i), g.point(j), taus[m], Mat2::Identity(), 1)).epsilon(1e-12));
}

TEST_CASE("semigroup multipliers") {
  const HeatKernel K = make_kernel(ConductivityField::identity(line_grid(4.0, 32)));
  const Eigen::VectorXd e = K.semigroup_multiplier(0.3);
  CHECK(e.maxCoeff() <= 1.0);
  CHECK(e.minCoeff() >= 0.0);
  CHECK(e.maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));
  const Eigen::VectorXd e2 = K.semigroup_multiplier(0.6);
  CHECK((e.cwiseProduct(e) - e2).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Gaussian sandwich holds on the discrete kernel") {
  const Grid g = line_grid();
  Mat2 M = Mat2::Zero();
  M(0, 0) = 0.8;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.0, 0.0}, 0.9, M);
  const std::vector<double> taus{0.1, 0.25, 0.5};
  const HeatKernel K = build_discrete(c, taus);
  const GaussianBoundFit fit = check_gaussian_bounds(K);
  CHECK(fit.entries > 0);
  CHECK(fit.violations == 0);
  CHECK(fit.grad_violations == 0);
  // sigma lies in [1, 1.8]: the lower envelope decays faster than the upper one.
  CHECK(fit.c_lower >= fit.c_upper);
  CHECK(fit.c_upper > 0.0);
  CHECK(fit.C_lower > 0.0);
  CHECK(std::isfinite(fit.C_upper));
}
