#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fpara/diagnostics.hpp"
#include "fpara/dnmap.hpp"
#include "fpara/heat_kernel.hpp"
#include "fpara/scenarios.hpp"

using namespace fpara;

namespace {

Grid grid_1d(int Nx, int Nt, double L = 4.0) {
  GridSpec s;
  s.L = L;
  s.Nx = Nx;
  s.Nt = Nt;
  return Grid(s);
}

const Box omega1{{-1.0, 0.0}, {1.0, 0.0}};

// Heat solution with zero data at t = -T inside (-x0, x0), driven from outside.
double erfc_solution(double t, double x, double T, double x0) {
  const double a = t + T;
  if (a <= 0.0) return 0.0;
  return std::erfc((x0 - x) / (2 * std::sqrt(a))) + std::erfc((x0 + x) / (2 * std::sqrt(a)));
}

double erfc_solution_dx(double t, double x, double T, double x0) {
  const double a = t + T;
  if (a <= 0.0) return 0.0;
  const double c = 1.0 / std::sqrt(std::numbers::pi * a);
  return c * (std::exp(-(x0 - x) * (x0 - x) / (4 * a)) - std::exp(-(x0 + x) * (x0 + x) / (4 * a)));
}

BoundarySeries erfc_boundary(const Grid& g, const DomainMasks& m, double x0) {
  BoundarySeries b(g.nt(), static_cast<Eigen::Index>(m.boundary().size()));
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t q = 0; q < m.boundary().size(); ++q)
      b(k, static_cast<Eigen::Index>(q)) = erfc_solution(g.t(k), g.point(m.boundary()[q].index)[0], g.spec().T, x0);
  return b;
}

double omega_error(const SpaceTimeField& v, const DomainMasks& m, double x0) {
  const Grid& g = v.grid();
  double e2 = 0.0, r2 = 0.0;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i : m.omega_nodes()) {
      const double ex = erfc_solution(g.t(k), g.x(static_cast<int>(i)), g.spec().T, x0);
      e2 += (v(k, i) - ex) * (v(k, i) - ex);
      r2 += ex * ex;
    }
  return std::sqrt(e2 / r2);
}

SpaceTimeField w_field(const Grid& g, const DomainMasks& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  SpaceTimeField f(g);
  for (int k = 1; k < g.nt(); ++k)
    for (std::size_t i : m.w_nodes()) f(k, i) = ud(rng);
  return f;
}

}  // namespace

TEST_CASE("local solver reproduces a manufactured heat solution") {
  const double x0 = 1.5;
  double prev = 0.0;
  for (int N : {32, 64, 128}) {
    const Grid g = grid_1d(N, N);
    const DomainMasks m(g, omega1, Box{{2.0, 0.0}, {3.0, 0.0}});
    const SpaceTimeField v = solve_local(ConductivityField::identity(g), m, erfc_boundary(g, m, x0));
    const double err = omega_error(v, m, x0);
    CAPTURE(N);
    CHECK(err < 2e-2);
    if (prev > 0.0) CHECK(std::log2(prev / err) > 1.5);
    prev = err;
  }
}

TEST_CASE("boundary flux of the manufactured solution converges at second order") {
  const double x0 = 1.5;
  auto flux_error = [&](int Nx) {
    const Grid g = grid_1d(Nx, 64);
    const DomainMasks m(g, omega1, Box{{2.0, 0.0}, {3.0, 0.0}});
    const SpaceTimeField v =
        SpaceTimeField::sample(g, [&](double t, Point x) { return erfc_solution(t, x[0], g.spec().T, x0); });
    const BoundarySeries fl = boundary_flux(v, ConductivityField::identity(g), m);
    double e = 0.0, r = 0.0;
    for (int k = 0; k < g.nt(); ++k)
      for (std::size_t q = 0; q < m.boundary().size(); ++q) {
        const auto& b = m.boundary()[q];
        const double ex = erfc_solution_dx(g.t(k), g.point(b.index)[0], g.spec().T, x0) * b.normal[0];
        e = std::max(e, std::abs(fl(k, static_cast<Eigen::Index>(q)) - ex));
        r = std::max(r, std::abs(ex));
      }
    return e / r;
  };
  const double e1 = flux_error(128), e2 = flux_error(256);
  CHECK(e2 < 1e-2);
  CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("local solver: zero data and linearity") {
  const Grid g = grid_1d(32, 32);
  const DomainMasks m(g, omega1, Box{{2.0, 0.0}, {3.0, 0.0}});
  Mat2 M = Mat2::Zero();
  M(0, 0) = 0.6;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.0, 0.0}, 0.9, M);
  const LocalSolver solver(c, m);
  const Eigen::Index nb = static_cast<Eigen::Index>(m.boundary().size());
  CHECK(solver.solve(BoundarySeries::Zero(g.nt(), nb)).max_abs() == 0.0);
  BoundarySeries a = BoundarySeries::Random(g.nt(), nb), b = BoundarySeries::Random(g.nt(), nb);
  a.row(0).setZero();
  b.row(0).setZero();
  const SpaceTimeField lhs = solver.solve(a - 2.0 * b);
  const SpaceTimeField rhs = solver.solve(a) + (-2.0) * solver.solve(b);
  CHECK(relative_l2(lhs, rhs, rhs) < 1e-12);
  // The trace of the solution is the data.
  CHECK((boundary_trace(solver.solve(a), m) - a).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("local DN matrix") {
  const Grid g = grid_1d(32, 24);
  const DomainMasks m(g, omega1, Box{{2.0, 0.0}, {3.0, 0.0}});
  Mat2 M = Mat2::Zero();
  M(0, 0) = 0.6;
  const ConductivityField c = ConductivityField::bump_perturbation(g, {0.0, 0.0}, 0.9, M);
  const LocalSolver solver(c, m);
  const DNMatrix D = assemble_local_dn(solver);
  const DNMatrix R = assemble_local_dn(solver, AssemblyOrder::reverse);
  CHECK((D.entries - R.entries).cwiseAbs().maxCoeff() == 0.0);
  CHECK(D.causal_violation() < 1e-12);
  CHECK(D.entries.rows() == 2 * g.nt());
  CHECK(dn_reproduction_error(solver, D, 17) < 1e-10);
  CHECK(D.sigma_hash == c.hash());

  // Column (k, p): the two boundary nodes are not lattice neighbours, so the
  // impulse is 1/2 in space times (1/4, 1/2, 1/4) in time.
  const int k = 9;
  const Eigen::Index p = 1, nn = 2;
  BoundarySeries gb = BoundarySeries::Zero(g.nt(), nn);
  gb(k - 1, p) = 0.125;
  gb(k, p) = 0.25;
  gb(k + 1, p) = 0.125;
  const BoundarySeries flux = local_dn(c, m, gb);
  double worst = 0.0;
  for (int kk = 0; kk < g.nt(); ++kk)
    for (Eigen::Index q = 0; q < nn; ++q) worst = std::max(worst, std::abs(D.entries(kk * nn + q, k * nn + p) - flux(kk, q)));
  CHECK(worst < 1e-12 * D.entries.cwiseAbs().maxCoeff());
}

TEST_CASE("nonlocal solver against the dense operator") {
  const Grid g = grid_1d(16, 16);
  const DomainMasks m(g, omega1, Box{{2.0, 0.0}, {3.0, 0.0}});
  const HeatKernel K = make_kernel(ConductivityField::identity(g));
  const double s = 0.4;
  const NonlocalSolver solver(K, s, m);
  const Eigen::MatrixXd A = dense_operator(K, s);
  const std::size_t N = g.spatial_size();

  SUBCASE("operator application") {
    const SpaceTimeField u = w_field(g, m, 3) + gaussian_datum(g);
    const SpaceTimeField Au = solver.apply_operator(u);
    const Eigen::Map<const Eigen::VectorXd> uv(u.values().data(), static_cast<Eigen::Index>(g.size()));
    const Eigen::VectorXd ref = A * uv;
    const Eigen::Map<const Eigen::VectorXd> got(Au.values().data(), static_cast<Eigen::Index>(g.size()));
    CHECK((got - ref).norm() / ref.norm() < 1e-12);
  }

  SUBCASE("constrained solve") {
    const SpaceTimeField f = w_field(g, m, 4);
    const SpaceTimeField u = solver.solve(f);
    // Unknowns: Omega nodes at k >= 1. Everything else is prescribed by f.
    std::vector<Eigen::Index> unk;
    for (int k = 1; k < g.nt(); ++k)
      for (std::size_t i : m.omega_nodes()) unk.push_back(static_cast<Eigen::Index>(k * N + i));
    const Eigen::Map<const Eigen::VectorXd> fv(f.values().data(), static_cast<Eigen::Index>(g.size()));
    const Eigen::VectorXd rhs = -(A * fv);
    Eigen::MatrixXd Auu(unk.size(), unk.size());
    Eigen::VectorXd b(unk.size());
    for (std::size_t r = 0; r < unk.size(); ++r) {
      b[static_cast<Eigen::Index>(r)] = rhs[unk[r]];
      for (std::size_t c = 0; c < unk.size(); ++c)
        Auu(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = A(unk[r], unk[c]);
    }
    const Eigen::VectorXd x = Auu.partialPivLu().solve(b);
    double e = 0.0, r = 0.0;
    for (std::size_t q = 0; q < unk.size(); ++q) {
      e = std::max(e, std::abs(u.values()[static_cast<std::size_t>(unk[q])] - x[static_cast<Eigen::Index>(q)]));
      r = std::max(r, std::abs(x[static_cast<Eigen::Index>(q)]));
    }
    CHECK(e < 1e-10 * r);
    // u = f outside Omega.
    for (int k = 0; k < g.nt(); ++k)
      for (std::size_t i = 0; i < N; ++i)
        if (!m.in_omega(i)) CHECK(u(k, i) == f(k, i));
    CHECK(solver.energy_ratio() > 0.0);
    CHECK(std::isfinite(solver.energy_ratio()));
  }
}

TEST_CASE("nonlocal solver: zero data, linearity and data checks") {
  const Grid g = grid_1d(32, 24);
  const DomainMasks m(g, omega1, Box{{2.0, 0.0}, {3.0, 0.0}});
  const NonlocalSolver solver(make_kernel(ConductivityField::identity(g)), 0.6, m);
  CHECK(solver.solve(SpaceTimeField(g)).max_abs() == 0.0);
  const SpaceTimeField a = w_field(g, m, 5), b = w_field(g, m, 6);
  const SpaceTimeField lhs = solver.dn(a + 0.5 * b);
  const SpaceTimeField rhs = solver.dn(a) + 0.5 * solver.dn(b);
  CHECK(relative_l2(lhs, rhs, rhs) < 1e-12);
  // Data outside W are rejected.
  SpaceTimeField bad = a;
  bad(5, static_cast<std::size_t>(g.x_index(-2.0))) = 1.0;
  CHECK_THROWS_AS(solver.solve(bad), InvalidArgument);
}

TEST_CASE("nonlocal DN matrix") {
  const Grid g = grid_1d(32, 16);
  const DomainMasks m(g, omega1, Box{{2.0, 0.0}, {3.0, 0.0}});
  const NonlocalSolver solver(make_kernel(ConductivityField::identity(g)), 0.5, m);
  const DNMatrix D = assemble_nonlocal_dn(solver);
  const DNMatrix R = assemble_nonlocal_dn(solver, AssemblyOrder::reverse);
  CHECK((D.entries - R.entries).cwiseAbs().maxCoeff() == 0.0);
  CHECK(D.causal_violation() < 1e-12);
  CHECK(D.row_nodes == m.w_nodes());
  CHECK(dn_reproduction_error(solver, D, 17) < 1e-10);
  CHECK_THROWS_AS(dn_reproduction_error(solver, DNMatrix{}, 1), InvalidArgument);
  CHECK(D.s == 0.5);
}

TEST_CASE("nonlocal energy ratio is stable under refinement") {
  double ratio[2];
  for (int l = 0; l < 2; ++l) {
    const Grid g = grid_1d(32 << l, 16 << l);
    const DomainMasks m(g, omega1, Box{{2.0, 0.0}, {3.0, 0.0}});
    const NonlocalSolver solver(make_kernel(ConductivityField::identity(g)), 0.5, m);
    for (const SpaceTimeField& f : exterior_bumps(g, m.w_box())) solver.solve(f);
    ratio[l] = solver.energy_ratio();
  }
  CHECK(ratio[1] / ratio[0] == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("grid hash tells grids apart") {
  CHECK(grid_hash(grid_1d(32, 16)) == grid_hash(grid_1d(32, 16)));
  CHECK(grid_hash(grid_1d(32, 16)) != grid_hash(grid_1d(32, 32)));
  CHECK(grid_hash(grid_1d(32, 16)) != grid_hash(grid_1d(32, 16, 8.0)));
}
