#include "fpara/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fpara/diagnostics.hpp"
#include "fpara/grid.hpp"

namespace fpara {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

namespace {

// Contributions of one cell [a, b] to the left and right node weights.
void cell_moments(double a, double b, double p, double& left, double& right) {
  const double m0 = (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
  const double m1 = (std::pow(b, p + 2.0) - std::pow(a, p + 2.0)) / (p + 2.0);
  const double h = b - a;
  left = (b * m0 - m1) / h;
  right = (m1 - a * m0) / h;
}

void check_exponent(double p) {
  if (!(p > -1.0)) throw InvalidArgument("weighted quadrature: exponent must exceed -1");
}

}  // namespace

std::vector<double> weighted_product_weights(std::span<const double> y, double p) {
  check_exponent(p);
  std::vector<double> w(y.size(), 0.0);
  for (std::size_t j = 0; j + 1 < y.size(); ++j) {
    double l, r;
    cell_moments(y[j], y[j + 1], p, l, r);
    w[j] += l;
    w[j + 1] += r;
  }
  return w;
}

std::vector<double> upper_weighted_integrals(std::span<const double> y, std::span<const double> f,
                                             double p) {
  check_exponent(p);
  if (y.size() != f.size()) throw InvalidArgument("weighted quadrature: size mismatch");
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t j = y.size() - 1; j-- > 0;) {
    double l, r;
    cell_moments(y[j], y[j + 1], p, l, r);
    out[j] = out[j + 1] + l * f[j] + r * f[j + 1];
  }
  return out;
}

double weighted_tail_estimate(std::span<const double> y, std::span<const double> f, double p) {
  const std::size_t N = y.size();
  if (N < 2) return 0.0;
  const double f1 = f[N - 1], f0 = f[N - 2];
  if (f1 == 0.0) return 0.0;
  if (f0 == 0.0 || (f0 > 0) != (f1 > 0) || std::abs(f1) >= std::abs(f0))
    return std::numeric_limits<double>::infinity();
  // f ~ C y^{-q} across the last cell.
  const double q = std::log(f0 / f1) / std::log(y[N - 1] / y[N - 2]);
  if (!(q > p + 1.0)) return std::numeric_limits<double>::infinity();
  return f1 * std::pow(y[N - 1], p + 1.0) / (q - p - 1.0);
}

WeightedIntegral weighted_y_integral(std::span<const double> y, std::span<const double> f, double p) {
  if (y.size() != f.size()) throw InvalidArgument("weighted quadrature: size mismatch");
  const auto w = weighted_product_weights(y, p);
  WeightedIntegral r;
  for (std::size_t j = 0; j < y.size(); ++j) r.value += w[j] * f[j];
  r.tail = weighted_tail_estimate(y, f, p);
  if (std::abs(r.tail) > 0.01 * std::abs(r.value)) {
    std::ostringstream os;
    os << "weighted y-integral: tail estimate " << r.tail << " exceeds 1% of the value " << r.value;
    warn(os.str());
  }
  return r;
}

WeightedIntegral weighted_y_integral(const Grid& grid, std::span<const double> f, double p) {
  return weighted_y_integral(grid.y_coords(), f, p);
}

double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) throw InvalidArgument("hurwitz_zeta: need s > 1 and a > 0");
  // Euler-Maclaurin after N explicit terms.
  constexpr int N = 12;
  double sum = 0.0;
  for (int k = 0; k < N; ++k) sum += std::pow(a + k, -s);
  const double x = a + N;
  sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  // B_{2j} / (2j)!
  static constexpr double b[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0,
                                 1.0 / 47900160.0, -691.0 / 1307674368000.0};
  double rising = s;  // s (s+1) ... (s+2j-2)
  double xp = std::pow(x, -s - 1.0);
  for (int j = 0; j < 6; ++j) {
    sum += b[j] * rising * xp;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    xp /= x * x;
  }
  return sum;
}

}  // namespace fpara
