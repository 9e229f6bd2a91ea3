#pragma once

#include <array>
#include <vector>

#include "fpara/conductivity.hpp"
#include "fpara/fracop.hpp"
#include "fpara/grid.hpp"

namespace fpara {

/// w(t, x, y) = int_y^inf mu^{1-2s} u~(t, x, mu) dmu, accumulated from Ymax
/// downward with the piecewise-linear product rule. The result has order 1 - s
/// (weight exponent 2s - 1). Throws NumericalFailure when the estimated tail
/// beyond Ymax exceeds 1% of the integral.
ExtensionField compute_w(const ExtensionField& utilde);

/// v(t, x) = w(t, x, 0).
SpaceTimeField compute_v(const ExtensionField& utilde);

/// Smooth test function bump((t - tc)/rt) prod_a bump((x_a - c_a)/r).
struct TestBump {
  double tc = 0.0, rt = 1.0;
  std::array<double, 2> center{};
  double r = 1.0;

  double value(double t, Point x, int n) const;
  /// (d_t phi, d_x0 phi, d_x1 phi).
  std::array<double, 3> gradient(double t, Point x, int n) const;
};

/// Version of the fixed test family; bump it whenever key_test_family changes.
inline constexpr int kKeyTestFamilyVersion = 1;

/// Tensor bumps at 3 locations along the diagonal of Omega_T times 3 scales,
/// all supported strictly inside Omega_T.
std::vector<TestBump> key_test_family(const Grid& grid, const DomainMasks& masks);

struct KeyEquationResult {
  double max_residual = 0.0;
  std::vector<double> residuals;  ///< one per test function, family order
};

/// max over the family of |int_{Omega_T} (v d_t phi - sigma grad v . grad phi)|
/// / (||v||_{L2(Omega_T)} ||phi||_{H1}), with ||phi||_{H1} the space-time H1 norm
/// and grad v by centered differences.
KeyEquationResult check_key_equation(const SpaceTimeField& v, const ConductivityField& sigma,
                                     const DomainMasks& masks);

struct OneMinusSResult {
  double discrepancy = 0.0;  ///< ||H^{1-s} v - d_{1-s} u|| / ||u||
  double literal = 0.0;      ///< ||H^{1-s} v + d_{1-s} u|| / ||u||, the sign as usually written
};

/// Compares H^{1-s} v with d_{1-s} u through the symbol route (sigma = Id only).
OneMinusSResult check_one_minus_s_relation(const SpaceTimeField& v, const SpaceTimeField& u, double s,
                                           const ConductivityField& sigma, SymbolPadding pad);

/// int_0^Ymax d_y(y^{1-2s} d_y u~) dy, i.e. the weighted flux at Ymax minus its
/// limit at y = 0. The continuum value is H^s u / d_s for the extension of u.
SpaceTimeField outline_integral(const ExtensionField& utilde);

/// sqrt(int v^2 + |grad_x v|^2) over the lattice, centered differences inside the box.
double l2h1_norm(const SpaceTimeField& v);

}  // namespace fpara
