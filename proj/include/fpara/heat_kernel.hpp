#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "fpara/conductivity.hpp"
#include "fpara/modal.hpp"

namespace fpara {

/// (4 pi tau)^{-n/2} det(sigma)^{-1/2} exp(-sigma^{-1}(x-z).(x-z) / (4 tau)).
double eval_exact(Point x, Point z, double tau, const Mat2& sigma, int n);

enum class KernelKind { exact_identity, exact_constant, discrete };

/// Heat kernel p(x, z, tau) of d_tau - div(sigma grad).
///
/// Every kernel carries a modal diagonalization of its spatial generator,
/// which is what the semigroup and the fractional operators use. Exact kinds
/// use Fourier modes on a padded box; the discrete kind uses the lattice
/// generator, so its semigroup is exact in time. Tables of p on the lattice
/// are optional and only needed for kernel diagnostics.
class HeatKernel {
 public:
  /// Constant sigma: Fourier modes on the box padded by `pad` (zero extension for pad >= 2).
  static HeatKernel exact(const Grid& grid, const Mat2& sigma, int pad = 2);
  /// Lattice generator of a (possibly variable) conductivity.
  static HeatKernel discrete(const ConductivityField& sigma);

  KernelKind kind() const { return kind_; }
  const Grid& grid() const { return basis_->grid(); }
  const ConductivityField& sigma() const { return sigma_; }
  const ModalBasis& basis() const { return *basis_; }

  /// exp(-tau mu) over the modes.
  Eigen::VectorXd semigroup_multiplier(double tau) const;

  /// Fills p(x_i, z_j, tau) for each tau. Exact kinds use the closed form; the
  /// discrete kind uses a positivity-preserving matrix exponential.
  void tabulate(std::span<const double> taus);
  const std::vector<double>& taus() const { return taus_; }
  const std::vector<Eigen::MatrixXd>& tables() const { return tables_; }
  /// Relative Frobenius asymmetry of each table before symmetrization.
  const std::vector<double>& asymmetry() const { return asymmetry_; }

 private:
  HeatKernel(KernelKind kind, ConductivityField sigma, std::shared_ptr<const ModalBasis> basis)
      : kind_(kind), sigma_(std::move(sigma)), basis_(std::move(basis)) {}

  KernelKind kind_;
  ConductivityField sigma_;
  std::shared_ptr<const ModalBasis> basis_;
  std::vector<double> taus_;
  std::vector<Eigen::MatrixXd> tables_;
  std::vector<double> asymmetry_;
};

/// Constant conductivities get the exact kernel, all others the discrete one.
HeatKernel make_kernel(const ConductivityField& sigma, int pad = 2);

/// Discrete kernel of the lattice generator, tabulated at the given times.
HeatKernel build_discrete(const ConductivityField& sigma, std::span<const double> taus);

/// exp(tau A) for the lattice generator A = -K / dx^n, by uniformization and
/// squaring. Entries are computed without cancellation when A has
/// non-negative off-diagonal entries, which keeps far-field values positive.
Eigen::MatrixXd discrete_propagator(const ConductivityField& sigma, double tau);

struct GaussianBoundFit {
  double c_lower = 0.0, C_lower = 0.0;  ///< C_lower G_{c_lower} <= p
  double c_upper = 0.0, C_upper = 0.0;  ///< p <= C_upper G_{c_upper}
  double grad_c = 0.0, grad_C = 0.0;    ///< |grad_x p| <= grad_C tau^{-(n+1)/2} exp(-grad_c |x-z|^2 / tau)
  std::size_t entries = 0;              ///< table entries entering the fit
  std::size_t violations = 0;
  std::size_t grad_violations = 0;
};

/// Fits the two-sided Gaussian sandwich, with G_c = (4 pi tau)^{-n/2} exp(-c |x-z|^2 / (4 tau)),
/// and the gradient bound over the tabulated values. Entries below 1e-10 of the
/// per-tau maximum are excluded: they are below what the lattice resolves.
GaussianBoundFit check_gaussian_bounds(const HeatKernel& kernel);

struct KernelHygiene {
  double l1_vs_exact = 0.0;  ///< relative L1 against eval_exact; NaN unless sigma is constant
  double mass = 0.0;         ///< max |sum_i p(x_i, z, tau) dx^n - 1|
  double symmetry = 0.0;     ///< largest asymmetry before symmetrization
  double chapman = 0.0;      ///< ||P(tau1) P(tau2) dx^n - P(tau1 + tau2)|| / ||P(tau1 + tau2)||, Frobenius
};

/// Diagnostics of the discrete kernel at tau1, tau2 and tau1 + tau2. The L1
/// comparison uses the source points z with |z_a| <= L/4, away from the box edge.
KernelHygiene kernel_hygiene(const ConductivityField& sigma, double tau1, double tau2);

/// int_0^inf tau^{-(b+1)} exp(-A / (4 tau)) dtau by double-exponential quadrature.
double tail_integral_fb(double b, double A);

}  // namespace fpara
