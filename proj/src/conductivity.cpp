#include "fpara/conductivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpara/diagnostics.hpp"

namespace fpara {

double smooth_bump(double r) {
  const double a = std::abs(r);
  if (a >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - a * a));
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

Mat2 normalize(const Mat2& m, int n) {
  if (n == 2) return m;
  Mat2 r = Mat2::Identity();
  r(0, 0) = m(0, 0);
  return r;
}

}  // namespace

ConductivityField::ConductivityField(const Grid& grid, std::vector<Mat2> nodes, Function f,
                                     bool constant, std::string name)
    : grid_(grid), nodes_(std::move(nodes)), f_(std::move(f)), constant_(constant),
      name_(std::move(name)) {
  for (const auto& m : nodes_) {
    if (!m.allFinite()) throw InvalidArgument("conductivity: non-finite entry");
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-12 * (1.0 + m.norm()))
      throw InvalidArgument("conductivity: matrix is not symmetric");
  }
  if (ellipticity() <= 0.0) throw InvalidArgument("conductivity: matrix is not positive definite");
}

ConductivityField ConductivityField::identity(const Grid& grid) {
  return constant(grid, Mat2::Identity());
}

ConductivityField ConductivityField::constant(const Grid& grid, const Mat2& sigma) {
  const Mat2 m = normalize(sigma, grid.dim());
  std::vector<Mat2> nodes(grid.spatial_size(), m);
  return ConductivityField(grid, std::move(nodes), [m](Point) { return m; }, true,
                           m.isIdentity(0.0) ? "identity" : "constant");
}

ConductivityField ConductivityField::from_function(const Grid& grid, Function f, std::string name) {
  const int n = grid.dim();
  Function g = [f, n](Point p) { return normalize(f(p), n); };
  std::vector<Mat2> nodes(grid.spatial_size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = g(grid.point(i));
  return ConductivityField(grid, std::move(nodes), std::move(g), false, std::move(name));
}

ConductivityField ConductivityField::bump_perturbation(const Grid& grid, Point c, double radius,
                                                       const Mat2& M) {
  if (!(radius > 0.0)) throw InvalidArgument("conductivity: bump radius must be positive");
  const int n = grid.dim();
  auto f = [c, radius, M, n](Point p) -> Mat2 {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += (p[a] - c[a]) * (p[a] - c[a]);
    return Mat2::Identity() + smooth_bump(std::sqrt(r2) / radius) * M;
  };
  std::ostringstream os;
  os << "bump(r=" << radius << ")";
  return from_function(grid, f, os.str());
}

ConductivityField ConductivityField::on_grid(const Grid& grid) const {
  if (grid.dim() != dim()) throw InvalidArgument("conductivity: dimension mismatch");
  if (constant_) {
    ConductivityField r = constant(grid, nodes_.front());
    r.name_ = name_;
    return r;
  }
  if (!f_) throw InvalidArgument("conductivity: lattice-only field cannot be re-sampled");
  return from_function(grid, f_, name_);
}

Mat2 ConductivityField::eval(Point p) const {
  if (f_) return f_(p);
  const int n = dim();
  const double L = grid_.spec().L, h = grid_.dx();
  std::array<int, 2> i0{0, 0};
  std::array<double, 2> th{0.0, 0.0};
  for (int a = 0; a < n; ++a) {
    const double r = std::clamp((p[a] + L) / h, 0.0, grid_.nx() - 1.0);
    i0[a] = std::min(static_cast<int>(std::floor(r)), grid_.nx() - 2);
    th[a] = r - i0[a];
  }
  if (n == 1) return (1.0 - th[0]) * nodes_[i0[0]] + th[0] * nodes_[i0[0] + 1];
  Mat2 acc = Mat2::Zero();
  for (int da = 0; da < 2; ++da)
    for (int db = 0; db < 2; ++db) {
      const double w = (da ? th[0] : 1.0 - th[0]) * (db ? th[1] : 1.0 - th[1]);
      acc += w * nodes_[grid_.flatten({i0[0] + da, i0[1] + db})];
    }
  return acc;
}

bool ConductivityField::is_identity() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const Mat2& m) { return m.isIdentity(0.0); });
}

double ConductivityField::ellipticity() const {
  double lam = 1.0;
  for (const auto& m : nodes_) {
    double lo, hi;
    if (dim() == 1) {
      lo = hi = m(0, 0);
    } else {
      Eigen::SelfAdjointEigenSolver<Mat2> es(m, Eigen::EigenvaluesOnly);
      lo = es.eigenvalues()(0);
      hi = es.eigenvalues()(1);
    }
    if (lo <= 0.0) return 0.0;
    lam = std::min({lam, lo, 1.0 / hi});
  }
  return lam;
}

void ConductivityField::require_ellipticity(double lambda) const {
  const double e = ellipticity();
  if (e < lambda) {
    std::ostringstream os;
    os << "conductivity: ellipticity " << e << " below the required " << lambda;
    throw InvalidArgument(os.str());
  }
}

bool ConductivityField::identity_outside(const DomainMasks& masks, double tol) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (!masks.in_closure(i) && !nodes_[i].isIdentity(tol)) return false;
  return true;
}

std::uint64_t ConductivityField::hash() const {
  std::uint64_t h = fnv1a(nodes_.data(), nodes_.size() * sizeof(Mat2));
  const std::string g = grid_.spec().describe();
  return fnv1a(g.data(), g.size(), h);
}

}  // namespace fpara
