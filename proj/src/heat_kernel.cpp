#include "fpara/heat_kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fpara/diagnostics.hpp"

namespace fpara {

double eval_exact(Point x, Point z, double tau, const Mat2& sigma, int n) {
  if (!(tau > 0.0)) throw InvalidArgument("eval_exact: tau must be positive");
  if (n != 1 && n != 2) throw InvalidArgument("eval_exact: n must be 1 or 2");
  const double pref = std::pow(4.0 * std::numbers::pi * tau, -0.5 * n);
  if (n == 1) {
    const double s = sigma(0, 0);
    if (!(s > 0.0)) throw InvalidArgument("eval_exact: sigma must be positive definite");
    const double r = x[0] - z[0];
    return pref / std::sqrt(s) * std::exp(-r * r / (4.0 * tau * s));
  }
  const double det = sigma.determinant();
  if (!(det > 0.0) || !(sigma(0, 0) > 0.0)) throw InvalidArgument("eval_exact: sigma must be positive definite");
  const Eigen::Vector2d d(x[0] - z[0], x[1] - z[1]);
  const double q = d.dot(sigma.inverse() * d);
  return pref / std::sqrt(det) * std::exp(-q / (4.0 * tau));
}

HeatKernel HeatKernel::exact(const Grid& grid, const Mat2& sigma, int pad) {
  auto field = ConductivityField::constant(grid, sigma);
  const KernelKind kind = field.is_identity() ? KernelKind::exact_identity : KernelKind::exact_constant;
  auto basis = std::make_shared<const ModalBasis>(ModalBasis::spectral(grid, field.at(0), pad));
  return HeatKernel(kind, std::move(field), std::move(basis));
}

HeatKernel HeatKernel::discrete(const ConductivityField& sigma) {
  auto basis = std::make_shared<const ModalBasis>(ModalBasis::finite_difference(sigma));
  return HeatKernel(KernelKind::discrete, sigma, std::move(basis));
}

HeatKernel make_kernel(const ConductivityField& sigma, int pad) {
  if (sigma.is_constant()) return HeatKernel::exact(sigma.grid(), sigma.at(0), pad);
  return HeatKernel::discrete(sigma);
}

Eigen::VectorXd HeatKernel::semigroup_multiplier(double tau) const {
  return (-tau * basis_->eigenvalues().array()).exp().matrix();
}

Eigen::MatrixXd discrete_propagator(const ConductivityField& sigma, double tau) {
  const Grid& g = sigma.grid();
  const SparseMatrix A = -fd_stiffness(sigma) / g.cell_volume();
  const Eigen::Index N = A.rows();
  double c = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) c = std::max(c, -A.coeff(i, i));
  // exp(tau A) = exp(-tau c) exp(tau B) with B = A + c I, evaluated as
  // (exp(h B))^(2^k) with h c <= 1.
  int k = 0;
  while (tau * c / std::ldexp(1.0, k) > 1.0) ++k;
  const double h = tau / std::ldexp(1.0, k);
  SparseMatrix B = A;
  for (Eigen::Index i = 0; i < N; ++i) B.coeffRef(i, i) += c;
  B *= h;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(N, N);
  Eigen::MatrixXd E = term;
  for (int m = 1; m < 60; ++m) {
    term = (term * B) / m;
    E += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18 * E.cwiseAbs().maxCoeff()) break;
  }
  E *= std::exp(-h * c);
  for (int i = 0; i < k; ++i) E = E * E;
  return E;
}

void HeatKernel::tabulate(std::span<const double> taus) {
  const Grid& g = grid();
  const std::size_t N = g.spatial_size();
  taus_.clear();
  tables_.clear();
  asymmetry_.clear();
  for (double tau : taus) {
    if (!(tau > 0.0)) throw InvalidArgument("heat kernel: tabulation times must be positive");
    Eigen::MatrixXd P(N, N);
    if (kind_ == KernelKind::discrete) {
      double smax = 0.0;
      for (std::size_t i = 0; i < N; ++i) smax = std::max(smax, sigma_.at(i).norm());
      if (std::sqrt(2.0 * tau * smax) < g.dx()) {
        std::ostringstream os;
        os << "heat kernel: tau=" << tau << " is below the lattice resolution";
        warn(os.str());
      }
      P = discrete_propagator(sigma_, tau) / g.cell_volume();
    } else {
      const Mat2 s = sigma_.at(0);
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) P(i, j) = eval_exact(g.point(i), g.point(j), tau, s, g.dim());
    }
    const double asym = (P - P.transpose()).norm() / P.norm();
    P = 0.5 * (P + P.transpose()).eval();
    taus_.push_back(tau);
    tables_.push_back(std::move(P));
    asymmetry_.push_back(asym);
  }
}

HeatKernel build_discrete(const ConductivityField& sigma, std::span<const double> taus) {
  sigma.require_ellipticity(std::numeric_limits<double>::min());
  HeatKernel k = HeatKernel::discrete(sigma);
  k.tabulate(taus);
  return k;
}

KernelHygiene kernel_hygiene(const ConductivityField& sigma, double tau1, double tau2) {
  const Grid& g = sigma.grid();
  const double taus[3] = {tau1, tau2, tau1 + tau2};
  const HeatKernel k = build_discrete(sigma, taus);
  const double vol = g.cell_volume(), L = g.spec().L;
  const auto N = static_cast<Eigen::Index>(g.spatial_size());
  KernelHygiene h;
  h.l1_vs_exact = sigma.is_constant() ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  for (int m = 0; m < 3; ++m) {
    const Eigen::MatrixXd& P = k.tables()[m];
    h.symmetry = std::max(h.symmetry, k.asymmetry()[m]);
    for (Eigen::Index j = 0; j < N; ++j) h.mass = std::max(h.mass, std::abs(P.col(j).sum() * vol - 1.0));
    if (!sigma.is_constant()) continue;
    double diff = 0.0, ref = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      const Point z = g.point(static_cast<std::size_t>(j));
      bool inner = true;
      for (int a = 0; a < g.dim(); ++a) inner = inner && std::abs(z[a]) <= 0.25 * L;
      if (!inner) continue;
      for (Eigen::Index i = 0; i < N; ++i) {
        const double e = eval_exact(g.point(static_cast<std::size_t>(i)), z, taus[m], sigma.at(0), g.dim());
        diff += std::abs(P(i, j) - e);
        ref += std::abs(e);
      }
    }
    h.l1_vs_exact = std::max(h.l1_vs_exact, diff / ref);
  }
  const Eigen::MatrixXd& P3 = k.tables()[2];
  h.chapman = (k.tables()[0] * k.tables()[1] * vol - P3).norm() / P3.norm();
  return h;
}

namespace {

// Largest c in [0, cmax] with f(c) <= thr for a non-decreasing f.
template <class F>
double largest_below(F f, double thr, double cmax) {
  if (f(cmax) <= thr) return cmax;
  double lo = 0.0, hi = cmax;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * cmax; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) <= thr ? lo : hi) = mid;
  }
  return lo;
}

// Smallest c in [0, cmax] with f(c) >= thr for a non-decreasing f.
template <class F>
double smallest_above(F f, double thr, double cmax) {
  if (f(0.0) >= thr) return 0.0;
  double lo = 0.0, hi = cmax;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * cmax; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) >= thr ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

GaussianBoundFit check_gaussian_bounds(const HeatKernel& kernel) {
  if (kernel.taus().size() < 3) throw InvalidArgument("check_gaussian_bounds: need at least three tabulated times");
  const Grid& g = kernel.grid();
  const int n = g.dim();
  const std::size_t N = g.spatial_size();
  constexpr double eps = 1e-9;
  constexpr double cmax = 100.0;

  // Each admissible entry contributes log(p / G_0) = q and r^2 / (4 tau) = e,
  // so that log(p / G_c) = q + c e.
  std::vector<double> q, e;
  for (std::size_t m = 0; m < kernel.taus().size(); ++m) {
    const double tau = kernel.taus()[m];
    const auto& P = kernel.tables()[m];
    const double floor = 1e-10 * P.maxCoeff();
    const double lg = 0.5 * n * std::log(4.0 * std::numbers::pi * tau);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        const double p = P(i, j);
        if (!(p > floor)) continue;
        const auto x = g.point(i), z = g.point(j);
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (x[a] - z[a]) * (x[a] - z[a]);
        q.push_back(std::log(p) + lg);
        e.push_back(r2 / (4.0 * tau));
      }
  }
  GaussianBoundFit fit;
  fit.entries = q.size();
  if (q.empty()) return fit;

  auto log_up = [&](double c) {
    double v = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < q.size(); ++k) v = std::max(v, q[k] + c * e[k]);
    return v;
  };
  auto log_lo = [&](double c) {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < q.size(); ++k) v = std::min(v, q[k] + c * e[k]);
    return v;
  };
  fit.c_upper = largest_below(log_up, log_up(0.0) + eps, cmax);
  fit.C_upper = std::exp(log_up(fit.c_upper));
  fit.c_lower = smallest_above(log_lo, log_lo(cmax) - eps, cmax);
  fit.C_lower = std::exp(log_lo(fit.c_lower));
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] + fit.c_upper * e[k] > std::log(fit.C_upper) + 1e-12) ++fit.violations;
    if (q[k] + fit.c_lower * e[k] < std::log(fit.C_lower) - 1e-12) ++fit.violations;
  }

  // Gradient bound with half the decay rate of the upper Gaussian (in units of |x-z|^2 / tau).
  fit.grad_c = fit.c_upper / 8.0;
  std::vector<double> gq, ge;
  const double h = g.dx();
  for (std::size_t m = 0; m < kernel.taus().size(); ++m) {
    const double tau = kernel.taus()[m];
    const auto& P = kernel.tables()[m];
    const double floor = 1e-10 * P.maxCoeff() / h;
    for (std::size_t i = 0; i < N; ++i) {
      const auto mi = g.unflatten(i);
      bool interior = true;
      for (int a = 0; a < n; ++a) interior = interior && mi[a] > 0 && mi[a] + 1 < g.nx();
      if (!interior) continue;
      for (std::size_t j = 0; j < N; ++j) {
        double grad2 = 0.0;
        for (int a = 0; a < n; ++a) {
          auto mp = mi, mm = mi;
          ++mp[a];
          --mm[a];
          const double d = (P(g.flatten(mp), j) - P(g.flatten(mm), j)) / (2.0 * h);
          grad2 += d * d;
        }
        const double gr = std::sqrt(grad2);
        if (!(gr > floor)) continue;
        const auto x = g.point(i), z = g.point(j);
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) r2 += (x[a] - z[a]) * (x[a] - z[a]);
        gq.push_back(std::log(gr) + 0.5 * (n + 1) * std::log(tau));
        ge.push_back(r2 / tau);
      }
    }
  }
  double lg = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < gq.size(); ++k) lg = std::max(lg, gq[k] + fit.grad_c * ge[k]);
  fit.grad_C = gq.empty() ? 0.0 : std::exp(lg);
  for (std::size_t k = 0; k < gq.size(); ++k)
    if (gq[k] + fit.grad_c * ge[k] > lg + 1e-12) ++fit.grad_violations;
  return fit;
}

double tail_integral_fb(double b, double A) {
  if (!(b > 0.0) || !(A > 0.0)) throw InvalidArgument("tail_integral_fb: b and A must be positive");
  // Split at tau = 1. Below, tau = 1/v gives int_1^inf v^{b-1} exp(-A v / 4) dv;
  // above, tau = w^{-1/b} maps the algebraic tail onto a bounded integrand on (0, 1].
  boost::math::quadrature::exp_sinh<double> head;
  boost::math::quadrature::tanh_sinh<double> tail;
  double e1 = 0.0, e2 = 0.0;
  const double v1 = head.integrate([b, A](double v) { return std::exp((b - 1.0) * std::log(v) - 0.25 * A * v); },
                                   1.0, std::numeric_limits<double>::infinity(), 1e-14, &e1);
  const double v2 = tail.integrate(
      [b, A](double w) { return w <= 0.0 ? 1.0 / b : std::exp(-0.25 * A * std::pow(w, 1.0 / b)) / b; }, 0.0, 1.0,
      1e-14, &e2);
  const double v = v1 + v2, err = e1 + e2;
  if (!std::isfinite(v) || err > 1e-10 * std::abs(v)) {
    std::ostringstream os;
    os << "tail_integral_fb: quadrature did not converge (estimate " << v << ", error " << err << ")";
    throw NumericalFailure(os.str());
  }
  return v;
}

}  // namespace fpara
