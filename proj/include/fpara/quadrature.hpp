#pragma once

#include <span>
#include <vector>

namespace fpara {

class Grid;

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// Weights w_j with sum_j w_j f(y_j) = int_0^{y_last} y^a f(y) dy exactly for
/// piecewise-linear f. Requires a > -1 and y_0 >= 0.
std::vector<double> weighted_product_weights(std::span<const double> y, double exponent);

/// out[j] = int_{y_j}^{y_last} y^a f(y) dy under the same product rule.
std::vector<double> upper_weighted_integrals(std::span<const double> y, std::span<const double> f,
                                             double exponent);

struct WeightedIntegral {
  double value = 0.0;
  /// Estimated contribution of (y_last, inf), from a power-law fit of the last two samples.
  double tail = 0.0;
};

/// Estimate of int_{y_last}^inf y^a f(y) dy. Infinite when f does not decay fast enough.
double weighted_tail_estimate(std::span<const double> y, std::span<const double> f, double exponent);

WeightedIntegral weighted_y_integral(std::span<const double> y, std::span<const double> f,
                                     double exponent);
WeightedIntegral weighted_y_integral(const Grid& grid, std::span<const double> f, double exponent);

/// Hurwitz zeta sum_{k>=0} (a + k)^{-s} for s > 1, a > 0.
double hurwitz_zeta(double s, double a);

}  // namespace fpara
