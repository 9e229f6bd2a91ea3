#include "fpara/dnmap.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fpara/diagnostics.hpp"
#include "fpara/extension.hpp"
#include "fpara/fracop.hpp"
#include "fpara/modal.hpp"
#include "fpara/reduction.hpp"
#include "fpara/semigroup.hpp"

namespace fpara {

namespace {

std::vector<int> positions(const std::vector<std::size_t>& nodes, std::size_t total) {
  std::vector<int> pos(total, -1);
  for (std::size_t p = 0; p < nodes.size(); ++p) pos[nodes[p]] = static_cast<int>(p);
  return pos;
}

std::vector<std::size_t> boundary_nodes(const DomainMasks& masks) {
  std::vector<std::size_t> b;
  for (const BoundaryNode& bn : masks.boundary()) b.push_back(bn.index);
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Local problem

struct LocalSolver::Impl {
  Grid grid;
  LocalOptions opts;
  std::vector<std::size_t> interior, bnodes;
  Eigen::VectorXd rho;
  SparseMatrix A_ib;
  Eigen::SparseLU<SparseMatrix> lu_be, lu_bdf2;
  std::vector<ShiftStencil> stencils;

  explicit Impl(const Grid& g) : grid(g) {}
};

LocalSolver::LocalSolver(const ConductivityField& sigma, const DomainMasks& masks, std::vector<double> capacity,
                         LocalOptions opts)
    : sigma_(sigma), masks_(masks), impl_(std::make_unique<Impl>(sigma.grid())) {
  const Grid& g = sigma.grid();
  if (opts.substeps < 1) throw InvalidArgument("LocalSolver: substeps must be positive");
  if (!capacity.empty() && capacity.size() != g.spatial_size())
    throw InvalidArgument("LocalSolver: capacity must have one value per spatial node");
  Impl& m = *impl_;
  m.opts = opts;
  m.interior = masks.omega_nodes();
  m.bnodes = boundary_nodes(masks);
  const auto ipos = positions(m.interior, g.spatial_size());
  const auto bpos = positions(m.bnodes, g.spatial_size());
  const Eigen::Index nI = static_cast<Eigen::Index>(m.interior.size());
  const Eigen::Index nB = static_cast<Eigen::Index>(m.bnodes.size());
  m.rho = Eigen::VectorXd::Ones(nI);
  for (Eigen::Index p = 0; p < nI; ++p) {
    if (!capacity.empty()) m.rho[p] = capacity[m.interior[p]];
    if (!(m.rho[p] > 0.0)) throw InvalidArgument("LocalSolver: capacity must be positive");
  }

  const SparseMatrix K = fd_stiffness(sigma) / g.cell_volume();
  std::vector<Eigen::Triplet<double>> tii, tib;
  for (Eigen::Index c = 0; c < K.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(K, c); it; ++it) {
      const int r = ipos[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      const std::size_t col = static_cast<std::size_t>(it.col());
      if (ipos[col] >= 0)
        tii.emplace_back(r, ipos[col], it.value());
      else if (bpos[col] >= 0)
        tib.emplace_back(r, bpos[col], it.value());
      else if (it.value() != 0.0)
        throw InvalidArgument("LocalSolver: stencil of an interior node leaves the closure of Omega");
    }
  SparseMatrix A_ii(nI, nI);
  A_ii.setFromTriplets(tii.begin(), tii.end());
  m.A_ib.resize(nI, nB);
  m.A_ib.setFromTriplets(tib.begin(), tib.end());

  const double h = g.dt() / opts.substeps;
  auto system = [&](double c) {
    SparseMatrix S = A_ii;
    for (Eigen::Index p = 0; p < nI; ++p) S.coeffRef(p, p) += c * m.rho[p];
    S.makeCompressed();
    return S;
  };
  m.lu_be.compute(system(1.0 / h));
  m.lu_bdf2.compute(system(1.5 / h));
  if (m.lu_be.info() != Eigen::Success || m.lu_bdf2.info() != Eigen::Success)
    throw NumericalFailure("LocalSolver: factorization failed");
  for (int sub = 1; sub <= opts.substeps; ++sub)
    m.stencils.push_back(causal_shift_stencil(1.0 - static_cast<double>(sub) / opts.substeps));
}

LocalSolver::~LocalSolver() = default;
LocalSolver::LocalSolver(LocalSolver&&) noexcept = default;

SpaceTimeField LocalSolver::solve(const BoundarySeries& g) const {
  const Impl& m = *impl_;
  const Grid& grid = m.grid;
  const int Nt = grid.nt();
  const Eigen::Index nB = static_cast<Eigen::Index>(m.bnodes.size());
  if (g.rows() != Nt || g.cols() != nB) throw InvalidArgument("LocalSolver: boundary data has the wrong shape");
  if (g.row(0).cwiseAbs().maxCoeff() > 0.0)
    throw InvalidArgument("LocalSolver: boundary data must vanish at t = -T");
  const double h = grid.dt() / m.opts.substeps;
  const Eigen::Index nI = static_cast<Eigen::Index>(m.interior.size());
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(nI), prev = phi, rhs(nI);
  SpaceTimeField out(grid);
  bool first = true;
  for (int kt = 0; kt + 1 < Nt; ++kt) {
    for (int sub = 1; sub <= m.opts.substeps; ++sub) {
      const ShiftStencil& st = m.stencils[sub - 1];
      Eigen::VectorXd gb = Eigen::VectorXd::Zero(nB);
      for (int i = 0; i < 4; ++i)
        if (kt + 1 - st.offset[i] >= 0) gb += st.weight[i] * g.row(kt + 1 - st.offset[i]).transpose();
      const bool be = first || m.opts.scheme == LocalScheme::backward_euler;
      if (be)
        rhs = m.rho.cwiseProduct(phi) / h;
      else
        rhs = m.rho.cwiseProduct(4.0 * phi - prev) / (2.0 * h);
      rhs -= m.A_ib * gb;
      Eigen::VectorXd next = be ? m.lu_be.solve(rhs) : m.lu_bdf2.solve(rhs);
      prev = std::move(phi);
      phi = std::move(next);
      first = false;
    }
    for (Eigen::Index p = 0; p < nI; ++p) out(kt + 1, m.interior[p]) = phi[p];
    for (Eigen::Index b = 0; b < nB; ++b) out(kt + 1, m.bnodes[b]) = g(kt + 1, b);
  }
  return out;
}

SpaceTimeField solve_local(const ConductivityField& sigma, const DomainMasks& masks, const BoundarySeries& g,
                           LocalOptions opts) {
  return LocalSolver(sigma, masks, {}, opts).solve(g);
}

BoundarySeries boundary_trace(const SpaceTimeField& v, const DomainMasks& masks) {
  const auto& bn = masks.boundary();
  BoundarySeries out(v.grid().nt(), static_cast<Eigen::Index>(bn.size()));
  for (int k = 0; k < v.grid().nt(); ++k)
    for (std::size_t b = 0; b < bn.size(); ++b) out(k, static_cast<Eigen::Index>(b)) = v(k, bn[b].index);
  return out;
}

BoundarySeries boundary_flux(const SpaceTimeField& v, const ConductivityField& sigma, const DomainMasks& masks) {
  const Grid& g = v.grid();
  const int n = g.dim();
  const double h = g.dx();
  const auto& bn = masks.boundary();
  BoundarySeries out(g.nt(), static_cast<Eigen::Index>(bn.size()));
  for (std::size_t b = 0; b < bn.size(); ++b) {
    const auto mi = g.unflatten(bn[b].index);
    // Per axis: node offsets and weights of the derivative stencil.
    std::array<std::array<std::size_t, 3>, 2> idx{};
    std::array<std::array<double, 3>, 2> w{};
    for (int a = 0; a < n; ++a) {
      const double na = bn[b].normal[a];
      auto node = [&](int step) {
        auto m2 = mi;
        m2[a] += step;
        if (m2[a] < 0 || m2[a] >= g.nx()) throw InvalidArgument("boundary_flux: stencil leaves the box");
        return g.flatten(m2);
      };
      if (na != 0.0) {
        const int d = na > 0.0 ? -1 : 1;  // inward step
        idx[a] = {node(0), node(d), node(2 * d)};
        w[a] = {-3.0 * d / (2.0 * h), 4.0 * d / (2.0 * h), -1.0 * d / (2.0 * h)};
      } else {
        idx[a] = {node(-1), node(1), node(0)};
        w[a] = {-1.0 / (2.0 * h), 1.0 / (2.0 * h), 0.0};
      }
    }
    const Mat2& sg = sigma.at(bn[b].index);
    Eigen::Vector2d nu(bn[b].normal[0], n == 2 ? bn[b].normal[1] : 0.0);
    Eigen::Vector2d snu = sg * nu;
    if (n == 1) snu = Eigen::Vector2d(sg(0, 0) * nu[0], 0.0);
    for (int k = 0; k < g.nt(); ++k) {
      double flux = 0.0;
      for (int a = 0; a < n; ++a) {
        double d = 0.0;
        for (int q = 0; q < 3; ++q) d += w[a][q] * v(k, idx[a][q]);
        flux += snu[a] * d;
      }
      out(k, static_cast<Eigen::Index>(b)) = flux;
    }
  }
  return out;
}

BoundarySeries local_dn(const ConductivityField& sigma, const DomainMasks& masks, const BoundarySeries& g,
                        LocalOptions opts) {
  return boundary_flux(solve_local(sigma, masks, g, opts), sigma, masks);
}

// ---------------------------------------------------------------------------
// Nonlocal problem

struct NonlocalSolver::Impl {
  Eigen::MatrixXd C;  // causal modal coefficients, Nt x M
  std::vector<std::size_t> omega, all;
  Eigen::MatrixXd B0;  // instantaneous block, rows Omega, all columns
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

NonlocalSolver::NonlocalSolver(const HeatKernel& kernel, double s, const DomainMasks& masks, const TauQuadrature& quad)
    : kernel_(kernel), s_(s), masks_(masks), impl_(std::make_unique<Impl>()) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("NonlocalSolver: s must lie in (0,1)");
  const Grid& g = kernel.grid();
  Impl& m = *impl_;
  m.C = balakrishnan_coefficients(kernel, s, quad);
  m.omega = masks.omega_nodes();
  if (m.omega.empty()) throw InvalidArgument("NonlocalSolver: Omega has no lattice nodes");
  for (std::size_t i = 0; i < g.spatial_size(); ++i) m.all.push_back(i);
  m.B0 = kernel.basis().physical_block(m.C.row(0).transpose(), m.omega, m.all);
  Eigen::MatrixXd B00(m.omega.size(), m.omega.size());
  for (std::size_t q = 0; q < m.omega.size(); ++q) B00.col(static_cast<Eigen::Index>(q)) = m.B0.col(static_cast<Eigen::Index>(m.omega[q]));
  m.lu.compute(B00);
  const double rc = m.lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << "NonlocalSolver: instantaneous block is singular (rcond " << rc << ")";
    throw NumericalFailure(os.str());
  }
}

NonlocalSolver::~NonlocalSolver() = default;
NonlocalSolver::NonlocalSolver(NonlocalSolver&&) noexcept = default;

SpaceTimeField NonlocalSolver::solve(const SpaceTimeField& f) const {
  const Impl& m = *impl_;
  const Grid& g = kernel_.grid();
  if (!(f.grid() == g)) throw InvalidArgument("NonlocalSolver: data grid differs from kernel grid");
  if (!f.causal()) throw InvalidArgument("NonlocalSolver: data must be causal");
  const double fmax = f.max_abs();
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (!masks_.in_w(i) && std::abs(f(k, i)) > 1e-14 * fmax)
        throw InvalidArgument("NonlocalSolver: exterior data must be supported in W");
  const int Nt = g.nt();
  const ModalBasis& basis = kernel_.basis();
  const Eigen::Index M = basis.num_modes();
  const Eigen::Index Nsp = static_cast<Eigen::Index>(g.spatial_size());
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(Nt, M);
  SpaceTimeField u(g);
  const Eigen::Index nO = static_cast<Eigen::Index>(m.omega.size());
  for (int k = 1; k < Nt; ++k) {
    Eigen::RowVectorXcd hist = Eigen::RowVectorXcd::Zero(M);
    for (int l = 1; l < k; ++l) hist.array() += m.C.row(k - l).array().cast<cplx>() * U.row(l).array();
    const RowMatrix H = basis.from_modes(hist);
    RowMatrix row(1, Nsp);
    for (Eigen::Index i = 0; i < Nsp; ++i) row(0, i) = masks_.in_omega(static_cast<std::size_t>(i)) ? 0.0 : f(k, static_cast<std::size_t>(i));
    Eigen::VectorXd rhs(nO);
    const Eigen::VectorXd ext = m.B0 * row.row(0).transpose();
    for (Eigen::Index q = 0; q < nO; ++q) rhs[q] = -H(0, static_cast<Eigen::Index>(m.omega[q])) - ext[q];
    const Eigen::VectorXd uo = m.lu.solve(rhs);
    for (Eigen::Index q = 0; q < nO; ++q) row(0, static_cast<Eigen::Index>(m.omega[q])) = uo[q];
    for (Eigen::Index i = 0; i < Nsp; ++i) u(k, static_cast<std::size_t>(i)) = row(0, i);
    U.row(k) = basis.to_modes(row).row(0);
  }
  const double fn = f.norm();
  if (fn > 0.0) energy_ratio_ = std::max(energy_ratio_, u.norm() / fn);
  return u;
}

SpaceTimeField NonlocalSolver::apply_operator(const SpaceTimeField& u) const {
  return apply_causal_modal(u, kernel_.basis(), impl_->C);
}

SpaceTimeField NonlocalSolver::dn(const SpaceTimeField& f) const {
  SpaceTimeField r = apply_operator(solve(f));
  const Grid& g = r.grid();
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (!masks_.in_w(i)) r(k, i) = 0.0;
  return r;
}

SpaceTimeField solve_nonlocal(const HeatKernel& kernel, double s, const DomainMasks& masks, const SpaceTimeField& f,
                              const TauQuadrature& quad) {
  return NonlocalSolver(kernel, s, masks, quad).solve(f);
}

SpaceTimeField nonlocal_dn(const HeatKernel& kernel, double s, const DomainMasks& masks, const SpaceTimeField& f,
                           const TauQuadrature& quad) {
  return NonlocalSolver(kernel, s, masks, quad).dn(f);
}

Eigen::MatrixXd dense_operator(const HeatKernel& kernel, double s, const TauQuadrature& quad) {
  const Grid& g = kernel.grid();
  const Eigen::Index N = static_cast<Eigen::Index>(g.size());
  if (N > 8192) throw InvalidArgument("dense_operator: lattice too large for dense assembly");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  const Eigen::MatrixXd C = balakrishnan_coefficients(kernel, s, quad);
  for (Eigen::Index j = 0; j < N; ++j) {
    SpaceTimeField e(g);
    e.values()[static_cast<std::size_t>(j)] = 1.0;
    e.enforce_support();
    if (e.max_abs() == 0.0) continue;
    const SpaceTimeField col = apply_causal_modal(e, kernel.basis(), C);
    for (Eigen::Index i = 0; i < N; ++i) A(i, j) = col.values()[static_cast<std::size_t>(i)];
  }
  return A;
}

// ---------------------------------------------------------------------------
// Transfer map

CauchyPair transfer_map(const NonlocalSolver& solver, const SpaceTimeField& f, const TauQuadrature& quad) {
  SpaceTimeField u = solver.solve(f);
  const ExtensionField ut = extend_kernel(u, solver.s(), solver.kernel(), quad);
  SpaceTimeField v = compute_v(ut);
  CauchyPair p{boundary_trace(v, solver.masks()), boundary_flux(v, solver.kernel().sigma(), solver.masks()),
               std::move(u), std::move(v)};
  return p;
}

double transfer_consistency(const CauchyPair& pair, const LocalSolver& local) {
  const SpaceTimeField vl = local.solve(pair.trace);
  const Grid& g = vl.grid();
  double num = 0.0, den = 0.0;
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t i : local.masks().omega_nodes()) {
      const double d = vl(k, i) - pair.v(k, i);
      num += d * d;
      den += pair.v(k, i) * pair.v(k, i);
    }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// ---------------------------------------------------------------------------
// DN matrices

std::uint64_t grid_hash(const Grid& grid) {
  const std::string d = grid.spec().describe();
  return fnv1a(d.data(), d.size());
}

double DNMatrix::causal_violation() const {
  const Eigen::Index nr = static_cast<Eigen::Index>(row_nodes.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(col_nodes.size());
  const double mx = entries.cwiseAbs().maxCoeff();
  if (mx == 0.0) return 0.0;
  double worst = 0.0;
  for (Eigen::Index c = 0; c < entries.cols(); ++c) {
    const Eigen::Index kc = c / nc;
    const Eigen::Index first = std::max<Eigen::Index>(1, kc - 1);
    for (Eigen::Index r = 0; r < entries.rows(); ++r)
      if (r / nr < first) worst = std::max(worst, std::abs(entries(r, c)));
  }
  return worst / mx;
}

namespace {

// Mollified impulse at (data node p, time k) on the data set `nodes`.
template <class Put>
void mollified_impulse(const Grid& g, const std::vector<std::size_t>& nodes, const std::vector<int>& pos,
                       std::size_t p, int k, Put&& put) {
  const int n = g.dim();
  // Spatial weights: tensor hat restricted to the data set.
  std::vector<std::pair<std::size_t, double>> sp{{nodes[p], 1.0}};
  for (int a = 0; a < n; ++a) {
    std::vector<std::pair<std::size_t, double>> next;
    for (auto [node, w] : sp) {
      next.emplace_back(node, 0.5 * w);
      auto m = g.unflatten(node);
      for (int d : {-1, 1}) {
        auto m2 = m;
        m2[a] += d;
        if (m2[a] < 0 || m2[a] >= g.nx()) continue;
        const std::size_t nb = g.flatten(m2);
        if (pos[nb] >= 0) next.emplace_back(nb, 0.25 * w);
      }
    }
    sp = std::move(next);
  }
  const double tw[3] = {0.25, 0.5, 0.25};
  for (int dk = -1; dk <= 1; ++dk) {
    const int kk = k + dk;
    if (kk < 1 || kk >= g.nt()) continue;
    for (auto [node, w] : sp) put(kk, node, tw[dk + 1] * w);
  }
}

template <class Response>
DNMatrix assemble(DNKind kind, const Grid& g, const std::vector<std::size_t>& nodes, AssemblyOrder order,
                  Response&& response) {
  DNMatrix D;
  D.kind = kind;
  D.row_nodes = nodes;
  D.col_nodes = nodes;
  D.nt = g.nt();
  D.grid_hash = grid_hash(g);
  const Eigen::Index nn = static_cast<Eigen::Index>(nodes.size());
  const Eigen::Index cols = nn * g.nt();
  D.entries = Eigen::MatrixXd::Zero(nn * g.nt(), cols);
  const auto pos = positions(nodes, g.spatial_size());
  std::vector<Eigen::Index> order_list;
  for (Eigen::Index c = nn; c < cols; ++c) order_list.push_back(c);  // skip k = 0
  if (order == AssemblyOrder::reverse) std::reverse(order_list.begin(), order_list.end());
  for (Eigen::Index c : order_list) {
    const int k = static_cast<int>(c / nn);
    const std::size_t p = static_cast<std::size_t>(c % nn);
    D.entries.col(c) = response(k, p, pos);
  }
  return D;
}

}  // namespace

DNMatrix assemble_local_dn(const LocalSolver& solver, AssemblyOrder order) {
  const DomainMasks& masks = solver.masks();
  const Grid& g = solver.sigma().grid();
  const std::vector<std::size_t> nodes = boundary_nodes(masks);
  const Eigen::Index nn = static_cast<Eigen::Index>(nodes.size());
  DNMatrix D = assemble(DNKind::local, g, nodes, order, [&](int k, std::size_t p, const std::vector<int>& pos) {
    BoundarySeries gb = BoundarySeries::Zero(g.nt(), nn);
    mollified_impulse(g, nodes, pos, p, k, [&](int kk, std::size_t node, double w) { gb(kk, pos[node]) += w; });
    const BoundarySeries flux = boundary_flux(solver.solve(gb), solver.sigma(), masks);
    Eigen::VectorXd col(nn * g.nt());
    for (int kk = 0; kk < g.nt(); ++kk) col.segment(kk * nn, nn) = flux.row(kk).transpose();
    return col;
  });
  D.sigma_hash = solver.sigma().hash();
  return D;
}

DNMatrix assemble_nonlocal_dn(const NonlocalSolver& solver, AssemblyOrder order) {
  const DomainMasks& masks = solver.masks();
  const Grid& g = solver.kernel().grid();
  const std::vector<std::size_t> nodes = masks.w_nodes();
  const Eigen::Index nn = static_cast<Eigen::Index>(nodes.size());
  DNMatrix D = assemble(DNKind::nonlocal, g, nodes, order, [&](int k, std::size_t p, const std::vector<int>& pos) {
    SpaceTimeField f(g);
    mollified_impulse(g, nodes, pos, p, k, [&](int kk, std::size_t node, double w) { f(kk, node) += w; });
    const SpaceTimeField r = solver.dn(f);
    Eigen::VectorXd col(nn * g.nt());
    for (int kk = 0; kk < g.nt(); ++kk)
      for (Eigen::Index q = 0; q < nn; ++q) col[kk * nn + q] = r(kk, nodes[static_cast<std::size_t>(q)]);
    return col;
  });
  D.s = solver.s();
  D.sigma_hash = solver.kernel().sigma().hash();
  return D;
}

namespace {

Eigen::VectorXd random_coefficients(Eigen::Index n, Eigen::Index skip, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = skip; j < n; ++j) c[j] = ud(rng);
  return c;
}

}  // namespace

double dn_reproduction_error(const LocalSolver& solver, const DNMatrix& D, std::uint64_t seed) {
  const DomainMasks& masks = solver.masks();
  const Grid& g = solver.sigma().grid();
  const std::vector<std::size_t> nodes = boundary_nodes(masks);
  if (D.kind != DNKind::local || D.col_nodes != nodes || D.nt != g.nt())
    throw InvalidArgument("dn_reproduction_error: matrix does not belong to this solver");
  const Eigen::Index nn = static_cast<Eigen::Index>(nodes.size());
  const Eigen::VectorXd c = random_coefficients(D.entries.cols(), nn, seed);
  const auto pos = positions(nodes, g.spatial_size());
  BoundarySeries gb = BoundarySeries::Zero(g.nt(), nn);
  for (Eigen::Index col = nn; col < D.entries.cols(); ++col)
    mollified_impulse(g, nodes, pos, static_cast<std::size_t>(col % nn), static_cast<int>(col / nn),
                      [&](int kk, std::size_t node, double w) { gb(kk, pos[node]) += c[col] * w; });
  const BoundarySeries flux = boundary_flux(solver.solve(gb), solver.sigma(), masks);
  const Eigen::VectorXd ref = D.entries * c;
  double e2 = 0.0;
  for (int kk = 0; kk < g.nt(); ++kk)
    e2 += (flux.row(kk).transpose() - ref.segment(kk * nn, nn)).squaredNorm();
  return std::sqrt(e2) / ref.norm();
}

double dn_reproduction_error(const NonlocalSolver& solver, const DNMatrix& D, std::uint64_t seed) {
  const Grid& g = solver.kernel().grid();
  const std::vector<std::size_t> nodes = solver.masks().w_nodes();
  if (D.kind != DNKind::nonlocal || D.col_nodes != nodes || D.nt != g.nt())
    throw InvalidArgument("dn_reproduction_error: matrix does not belong to this solver");
  const Eigen::Index nn = static_cast<Eigen::Index>(nodes.size());
  const Eigen::VectorXd c = random_coefficients(D.entries.cols(), nn, seed);
  const auto pos = positions(nodes, g.spatial_size());
  SpaceTimeField f(g);
  for (Eigen::Index col = nn; col < D.entries.cols(); ++col)
    mollified_impulse(g, nodes, pos, static_cast<std::size_t>(col % nn), static_cast<int>(col / nn),
                      [&](int kk, std::size_t node, double w) { f(kk, node) += c[col] * w; });
  const SpaceTimeField r = solver.dn(f);
  const Eigen::VectorXd ref = D.entries * c;
  double e2 = 0.0;
  for (int kk = 0; kk < g.nt(); ++kk)
    for (Eigen::Index q = 0; q < nn; ++q) {
      const double d = r(kk, nodes[static_cast<std::size_t>(q)]) - ref[kk * nn + q];
      e2 += d * d;
    }
  return std::sqrt(e2) / ref.norm();
}

}  // namespace fpara
