#include "fpara/tau_quadrature.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "fpara/diagnostics.hpp"
#include "fpara/fourier.hpp"
#include "fpara/fracop.hpp"
#include "fpara/quadrature.hpp"
#include "fpara/semigroup.hpp"

namespace fpara {

std::vector<TauNode> tau_nodes(double dt, int Nt, double s, double y, const TauQuadrature& q) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("tau quadrature: s must lie in (0,1)");
  if (q.panel_nodes < 1 || q.first_panel_nodes < 1 || q.log_panel_nodes < 1)
    throw InvalidArgument("tau quadrature: node counts must be positive");
  const double a = 0.25 * y * y;
  auto weight = [&](double tau) { return std::exp(-(1.0 + s) * std::log(tau) - a / tau); };
  std::vector<TauNode> nodes;

  if (a == 0.0) {
    // tau = dt sigma^p with p = 1/(1-s) turns F(tau) tau^{-1-s} into a bounded integrand.
    const GaussRule g = gauss_legendre(q.first_panel_nodes);
    const double p = 1.0 / (1.0 - s);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double sg = 0.5 * (g.nodes[i] + 1.0);
      const double tau = dt * std::pow(sg, p);
      const double plain = 0.5 * g.weights[i] * dt * p * std::pow(sg, p - 1.0);
      nodes.push_back({tau, plain * weight(tau), plain});
    }
  } else {
    // Below y^2/160 the factor exp(-y^2/(4 tau)) is under e^-40.
    const double lo = a / 40.0;
    if (lo < dt) {
      const GaussRule g = gauss_legendre(q.log_panel_nodes);
      const double l0 = std::log(lo), l1 = std::log(dt);
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double tau = std::exp(l0 + 0.5 * (g.nodes[i] + 1.0) * (l1 - l0));
        const double plain = 0.5 * g.weights[i] * (l1 - l0) * tau;
        nodes.push_back({tau, plain * weight(tau), plain});
      }
    }
  }

  const GaussRule g = gauss_legendre(q.panel_nodes);
  for (int m = 1; m < Nt; ++m) {
    const double t0 = m * dt, t1 = (m + 1) * dt;
    if (a / t1 > 45.0) continue;
    // Split panels where exp(-y^2/(4 tau)) varies strongly across the panel.
    const int nsub = std::clamp(static_cast<int>(std::ceil(0.5 * a * dt / (t0 * t1))), 1, 16);
    const double h = dt / nsub;
    for (int sub = 0; sub < nsub; ++sub) {
      const double u0 = t0 + sub * h;
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double tau = u0 + 0.5 * (g.nodes[i] + 1.0) * h;
        const double plain = 0.5 * g.weights[i] * h;
        nodes.push_back({tau, plain * weight(tau), plain});
      }
    }
  }
  return nodes;
}

double image_sum(double r, double mu, double y, double s, double P) {
  const double a = 0.25 * y * y;
  auto w = [&](double tau) { return std::exp(-(1.0 + s) * std::log(tau) - a / tau); };
  const double muP = mu * P;
  if (muP > 42.0 / 200000.0) {
    // Geometric damping: sum until exp(-mu m P) < e^-42.
    const int mmax = static_cast<int>(std::ceil(42.0 / muP));
    double acc = 0.0;
    for (int m = 1; m <= mmax; ++m) acc += std::exp(-muP * m) * w(r + m * P);
    return acc;
  }
  // No damping: explicit terms until a / tau <= 1/4, then expand exp(-a/tau)
  // in powers of a/tau and sum each power with the Hurwitz zeta function.
  const int K = std::max(0, static_cast<int>(std::ceil(4.0 * a / P)));
  double acc = 0.0;
  for (int m = 1; m <= K; ++m) acc += w(r + m * P);
  const double base = r / P + K + 1.0;
  double coef = 1.0;  // (-a)^j / j!
  for (int j = 0; j < 60; ++j) {
    const double term = coef * std::pow(P, -1.0 - s - j) * hurwitz_zeta(1.0 + s + j, base);
    acc += term;
    if (std::abs(term) < 1e-18 * std::abs(acc)) break;
    coef *= -a / (j + 1);
  }
  return acc;
}

Eigen::MatrixXd causal_coefficients(const std::vector<TauNode>& nodes, double dt, int Nt,
                                    const Eigen::VectorXd& mu, double alpha, double beta) {
  const Eigen::Index M = mu.size();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(Nt, M);
  Eigen::ArrayXd e(M);
  double wsum = 0.0;
  for (const auto& nd : nodes) {
    wsum += nd.weight;
    const ShiftStencil st = causal_shift_stencil(nd.tau / dt);
    e = (-nd.tau * mu.array()).exp();
    for (int i = 0; i < 4; ++i) {
      if (st.offset[i] >= Nt) continue;
      C.row(st.offset[i]).array() += (alpha * nd.weight * st.weight[i]) * e.transpose();
    }
  }
  C.row(0).array() += beta - alpha * wsum;
  return C;
}

Eigen::MatrixXcd periodic_multipliers(const std::vector<TauNode>& nodes, double dt, int Nt,
                                      const Eigen::VectorXd& mu, double s, double y, double alpha,
                                      double beta) {
  const Eigen::Index M = mu.size();
  const double P = Nt * dt;
  double wsum = 0.0;
  for (const auto& nd : nodes) wsum += nd.weight;
  // Per node and mode: weight + plain * images, the coefficient of exp(-tau_j z).
  Eigen::MatrixXd lead(static_cast<Eigen::Index>(nodes.size()), M);
  for (std::size_t j = 0; j < nodes.size(); ++j)
    for (Eigen::Index k = 0; k < M; ++k)
      lead(static_cast<Eigen::Index>(j), k) = nodes[j].weight + nodes[j].plain * image_sum(nodes[j].tau, mu[k], y, s, P);

  auto value = [&](double rho, Eigen::Index k) {
    cplx acc(0.0);
    const cplx z(mu[k], rho);
    for (std::size_t j = 0; j < nodes.size(); ++j)
      acc += lead(static_cast<Eigen::Index>(j), k) * std::exp(-nodes[j].tau * z);
    return beta + alpha * (acc - wsum);
  };
  Eigen::MatrixXcd out(Nt, M);
  for (int kt = 0; kt < Nt; ++kt) {
    const double rho = angular_frequency(kt, Nt, dt);
    const bool nyquist = Nt % 2 == 0 && kt == Nt / 2;
    for (Eigen::Index k = 0; k < M; ++k)
      out(kt, k) = nyquist ? cplx(0.5 * (value(rho, k) + value(-rho, k)).real(), 0.0) : value(rho, k);
  }
  return out;
}

Eigen::MatrixXcd causal_convolve(const Eigen::MatrixXd& C, const Eigen::MatrixXcd& U) {
  const Eigen::Index Nt = U.rows(), M = U.cols();
  if (C.rows() != Nt || C.cols() != M) throw InvalidArgument("causal_convolve: shape mismatch");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(Nt, M);
  if (Nt <= 128) {
    for (Eigen::Index k = 0; k < Nt; ++k)
      for (Eigen::Index m = 0; m <= k; ++m) out.row(k).array() += C.row(m).array() * U.row(k - m).array();
    return out;
  }
  const int L = static_cast<int>(2 * Nt);
  std::vector<cplx> a(static_cast<std::size_t>(L * M), cplx(0.0)), b(a.size(), cplx(0.0));
  for (Eigen::Index k = 0; k < M; ++k)
    for (Eigen::Index t = 0; t < Nt; ++t) {
      a[k * L + t] = C(t, k);
      b[k * L + t] = U(t, k);
    }
  fft_batch(a.data(), {L}, static_cast<int>(M), -1);
  fft_batch(b.data(), {L}, static_cast<int>(M), -1);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  fft_batch(a.data(), {L}, static_cast<int>(M), +1);
  for (Eigen::Index k = 0; k < M; ++k)
    for (Eigen::Index t = 0; t < Nt; ++t) out(t, k) = a[k * L + t] / static_cast<double>(L);
  return out;
}

namespace {

SpaceTimeField to_field(const RowMatrix& m, const Grid& g, TimeSupport support) {
  return SpaceTimeField(g, std::vector<double>(m.data(), m.data() + m.size()), support);
}

}  // namespace

SpaceTimeField apply_causal_modal(const SpaceTimeField& u, const ModalBasis& basis, const Eigen::MatrixXd& C) {
  if (!u.causal()) throw InvalidArgument("causal operator applied to a periodic field");
  const Eigen::MatrixXcd U = basis.to_modes(as_matrix(u));
  return to_field(basis.from_modes(causal_convolve(C, U)), u.grid(), TimeSupport::causal);
}

SpaceTimeField apply_periodic_modal(const SpaceTimeField& u, const ModalBasis& basis,
                                    const Eigen::MatrixXcd& mult) {
  Eigen::MatrixXcd U = basis.to_modes(as_matrix(u));
  const int Nt = static_cast<int>(U.rows());
  const int M = static_cast<int>(U.cols());
  // Columns are contiguous: transform each mode's time series.
  fft_batch(U.data(), {Nt}, M, -1);
  U.array() *= mult.array();
  fft_batch(U.data(), {Nt}, M, +1);
  U /= static_cast<double>(Nt);
  return to_field(basis.from_modes(U), u.grid(), u.support());
}

Eigen::MatrixXd balakrishnan_coefficients(const HeatKernel& kernel, double s, const TauQuadrature& q) {
  const Grid& g = kernel.grid();
  const double alpha = -s / boost::math::tgamma(1.0 - s);
  const double beta = -alpha * std::pow(2.0 * g.spec().T, -s) / s;
  return causal_coefficients(tau_nodes(g.dt(), g.nt(), s, 0.0, q), g.dt(), g.nt(),
                             kernel.basis().eigenvalues(), alpha, beta);
}

Eigen::MatrixXcd balakrishnan_multipliers(const HeatKernel& kernel, double s, const TauQuadrature& q) {
  const Grid& g = kernel.grid();
  const double alpha = -s / boost::math::tgamma(1.0 - s);
  const double beta = -alpha * std::pow(2.0 * g.spec().T, -s) / s;
  return periodic_multipliers(tau_nodes(g.dt(), g.nt(), s, 0.0, q), g.dt(), g.nt(),
                              kernel.basis().eigenvalues(), s, 0.0, alpha, beta);
}

namespace {

void extension_scalars(const Grid& g, double s, double y, double& alpha, double& beta) {
  const FracConstants fc = frac_constants(s);
  alpha = fc.c * std::pow(y, 2.0 * s);
  beta = boost::math::gamma_q(s, y * y / (8.0 * g.spec().T));
}

}  // namespace

Eigen::MatrixXd extension_coefficients(const HeatKernel& kernel, double s, double y, const TauQuadrature& q) {
  const Grid& g = kernel.grid();
  if (y == 0.0) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(g.nt(), kernel.basis().num_modes());
    C.row(0).setOnes();
    return C;
  }
  double alpha, beta;
  extension_scalars(g, s, y, alpha, beta);
  return causal_coefficients(tau_nodes(g.dt(), g.nt(), s, y, q), g.dt(), g.nt(),
                             kernel.basis().eigenvalues(), alpha, beta);
}

Eigen::MatrixXcd extension_multipliers(const HeatKernel& kernel, double s, double y, const TauQuadrature& q) {
  const Grid& g = kernel.grid();
  if (y == 0.0) return Eigen::MatrixXcd::Ones(g.nt(), kernel.basis().num_modes());
  double alpha, beta;
  extension_scalars(g, s, y, alpha, beta);
  return periodic_multipliers(tau_nodes(g.dt(), g.nt(), s, y, q), g.dt(), g.nt(),
                              kernel.basis().eigenvalues(), s, y, alpha, beta);
}

}  // namespace fpara
