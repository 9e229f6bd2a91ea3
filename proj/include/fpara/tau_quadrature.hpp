#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fpara/grid.hpp"
#include "fpara/heat_kernel.hpp"

namespace fpara {

/// Node counts of the tau-quadrature. Panels are aligned with the time
/// lattice, [m dt, (m+1) dt] for m = 0..Nt-1, so that the shifted field is a
/// fixed cubic in tau on each panel; beyond 2T the shifted field vanishes.
struct TauQuadrature {
  int panel_nodes = 6;         ///< Gauss-Legendre nodes per lattice panel
  int first_panel_nodes = 12;  ///< graded nodes on (0, dt] for the tau^{-1-s} singularity
  int log_panel_nodes = 32;    ///< log-spaced nodes on (0, dt] when y > 0
};

struct TauNode {
  double tau;
  double weight;  ///< includes tau^{-1-s} exp(-y^2 / (4 tau))
  double plain;   ///< the same node's weight without that factor
};

/// Nodes for int_0^{Nt dt} F(tau) tau^{-1-s} exp(-y^2/(4 tau)) dtau with F(0) = 0.
std::vector<TauNode> tau_nodes(double dt, int Nt, double s, double y, const TauQuadrature& q);

/// sum_{m>=1} exp(-mu m P) w(r + m P) with w(tau) = tau^{-1-s} exp(-y^2/(4 tau)):
/// the periodic images of the tau-integral beyond one time period P.
double image_sum(double r, double mu, double y, double s, double P);

/// Causal per-mode convolution coefficients C (Nt x M) of the operator
///   beta I + alpha sum_j w_j (P_{tau_j} - I),
/// i.e. (Op u)_k = sum_{m<=k} C(m, mode) u_{k-m} in modal coordinates.
Eigen::MatrixXd causal_coefficients(const std::vector<TauNode>& nodes, double dt, int Nt,
                                    const Eigen::VectorXd& mu, double alpha, double beta);

/// Multipliers (Nt x M) of the same operator on the periodic time box, with
/// the tau-integral continued over all periodic images.
Eigen::MatrixXcd periodic_multipliers(const std::vector<TauNode>& nodes, double dt, int Nt,
                                      const Eigen::VectorXd& mu, double s, double y, double alpha,
                                      double beta);

/// out(k, :) = sum_{m<=k} C(m, :) .* U(k-m, :), column by column.
Eigen::MatrixXcd causal_convolve(const Eigen::MatrixXd& C, const Eigen::MatrixXcd& U);

SpaceTimeField apply_causal_modal(const SpaceTimeField& u, const ModalBasis& basis,
                                  const Eigen::MatrixXd& C);
SpaceTimeField apply_periodic_modal(const SpaceTimeField& u, const ModalBasis& basis,
                                    const Eigen::MatrixXcd& multipliers);

/// Coefficients of (d_t - div sigma grad)^s:
///   -(s / Gamma(1-s)) [ int_0^{2T} (P_tau - I) tau^{-1-s} dtau - (2T)^{-s}/s ].
Eigen::MatrixXd balakrishnan_coefficients(const HeatKernel& kernel, double s, const TauQuadrature& q);
Eigen::MatrixXcd balakrishnan_multipliers(const HeatKernel& kernel, double s, const TauQuadrature& q);

/// Coefficients of u -> u~(., ., y): Q(s, y^2/(8T)) I + c_s y^{2s} int_0^{2T} e^{-y^2/4tau} (P_tau - I) tau^{-1-s} dtau,
/// where Q is the regularized upper incomplete gamma function.
Eigen::MatrixXd extension_coefficients(const HeatKernel& kernel, double s, double y, const TauQuadrature& q);
Eigen::MatrixXcd extension_multipliers(const HeatKernel& kernel, double s, double y, const TauQuadrature& q);

}  // namespace fpara
