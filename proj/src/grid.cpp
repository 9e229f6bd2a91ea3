#include "fpara/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpara/diagnostics.hpp"
#include "fpara/quadrature.hpp"

namespace fpara {

void GridSpec::validate() const {
  if (n != 1 && n != 2) throw InvalidArgument("grid: spatial dimension must be 1 or 2");
  if (!(L > 0.0) || !(T > 0.0)) throw InvalidArgument("grid: L and T must be positive");
  if (!(Ymax >= 0.0)) throw InvalidArgument("grid: Ymax must be positive (or 0 for the default)");
  if (Nx < 4 || Nt < 4 || Ny < 4) throw InvalidArgument("grid: Nx, Nt and Ny must be at least 4");
  if (!(grade >= 1.0)) throw InvalidArgument("grid: grade must be >= 1");
}

double GridSpec::y_max() const { return Ymax > 0.0 ? Ymax : 10.0 * std::sqrt(2.0 * T); }

GridSpec GridSpec::refined(int factor) const {
  if (factor < 1) throw InvalidArgument("grid: refinement factor must be >= 1");
  GridSpec r = *this;
  r.Nx *= factor;
  r.Nt *= factor;
  r.Ny *= factor;
  return r;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << "n=" << n << " L=" << L << " Nx=" << Nx << " T=" << T << " Nt=" << Nt
     << " Ymax=" << y_max() << " Ny=" << Ny << " grade=" << grade;
  return os.str();
}

Grid::Grid(GridSpec spec) : spec_(spec) {
  spec_.validate();
  dx_ = 2.0 * spec_.L / spec_.Nx;
  dt_ = 2.0 * spec_.T / spec_.Nt;
  spatial_size_ = spec_.n == 1 ? static_cast<std::size_t>(spec_.Nx)
                               : static_cast<std::size_t>(spec_.Nx) * spec_.Nx;
  const double ymax = spec_.y_max();
  y_.resize(static_cast<std::size_t>(spec_.Ny) + 1);
  for (int j = 0; j <= spec_.Ny; ++j)
    y_[j] = ymax * std::pow(static_cast<double>(j) / spec_.Ny, spec_.grade);
  y_.back() = ymax;
}

Grid build_grid(const GridSpec& spec) { return Grid(spec); }

double Grid::cell_volume() const { return spec_.n == 1 ? dx_ : dx_ * dx_; }

int Grid::x_index(double x) const {
  const int i = static_cast<int>(std::lround((x + spec_.L) / dx_));
  if (i < 0 || i >= spec_.Nx) throw InvalidArgument("grid: coordinate outside the spatial box");
  return i;
}

int Grid::t_index(double t) const {
  const int k = static_cast<int>(std::lround((t + spec_.T) / dt_));
  if (k < 0 || k >= spec_.Nt) throw InvalidArgument("grid: time outside the lattice");
  return k;
}

std::array<int, 2> Grid::unflatten(std::size_t idx) const {
  if (spec_.n == 1) return {static_cast<int>(idx), 0};
  return {static_cast<int>(idx / spec_.Nx), static_cast<int>(idx % spec_.Nx)};
}

std::size_t Grid::flatten(std::array<int, 2> m) const {
  if (spec_.n == 1) return static_cast<std::size_t>(m[0]);
  return static_cast<std::size_t>(m[0]) * spec_.Nx + static_cast<std::size_t>(m[1]);
}

std::array<double, 2> Grid::point(std::size_t idx) const {
  const auto m = unflatten(idx);
  return {x(m[0]), spec_.n == 1 ? 0.0 : x(m[1])};
}

// ---------------------------------------------------------------------------

SpaceTimeField::SpaceTimeField(Grid grid, TimeSupport support)
    : grid_(std::move(grid)), support_(support), values_(grid_.size(), 0.0) {}

SpaceTimeField::SpaceTimeField(Grid grid, std::vector<double> values, TimeSupport support)
    : grid_(std::move(grid)), support_(support), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("field: value count does not match grid");
  enforce_support();
}

void SpaceTimeField::enforce_support() {
  if (support_ != TimeSupport::causal) return;
  // Only t_0 = -T lies at or before -T on the lattice.
  std::fill(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(grid_.spatial_size()), 0.0);
}

std::span<double> SpaceTimeField::slice(int k) {
  return std::span<double>(values_).subspan(k * grid_.spatial_size(), grid_.spatial_size());
}

std::span<const double> SpaceTimeField::slice(int k) const {
  return std::span<const double>(values_).subspan(k * grid_.spatial_size(), grid_.spatial_size());
}

void SpaceTimeField::check_compatible(const SpaceTimeField& other) const {
  if (!(grid_ == other.grid_)) throw InvalidArgument("field: grids differ");
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

double SpaceTimeField::norm() const {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return std::sqrt(acc * grid_.dt() * grid_.cell_volume());
}

double SpaceTimeField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
SpaceTimeField operator*(double c, SpaceTimeField a) { return a *= c; }

double relative_l2(const SpaceTimeField& a, const SpaceTimeField& b, const SpaceTimeField& ref) {
  const double r = ref.norm();
  if (r == 0.0) return (a - b).norm();
  return (a - b).norm() / r;
}

// ---------------------------------------------------------------------------

ExtensionField::ExtensionField(Grid grid, double s)
    : grid_(std::move(grid)), s_(s), values_(grid_.size() * (grid_.ny() + 1), 0.0) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("extension field: order must lie in (0,1)");
}

std::span<double> ExtensionField::plane(int j) {
  return std::span<double>(values_).subspan(j * grid_.size(), grid_.size());
}

std::span<const double> ExtensionField::plane(int j) const {
  return std::span<const double>(values_).subspan(j * grid_.size(), grid_.size());
}

SpaceTimeField ExtensionField::plane_field(int j) const {
  auto p = plane(j);
  return SpaceTimeField(grid_, std::vector<double>(p.begin(), p.end()));
}

void ExtensionField::set_plane(int j, const SpaceTimeField& f) {
  if (!(f.grid() == grid_)) throw InvalidArgument("extension field: plane grid differs");
  std::copy(f.values().begin(), f.values().end(), plane(j).begin());
}

std::vector<double> ExtensionField::column(int k, std::size_t i) const {
  std::vector<double> c(static_cast<std::size_t>(planes()));
  for (int j = 0; j < planes(); ++j) c[j] = at(j, k, i);
  return c;
}

double ExtensionField::weighted_norm() const {
  const auto w = weighted_product_weights(grid_.y_coords(), 1.0 - 2.0 * s_);
  double acc = 0.0;
  for (int j = 0; j < planes(); ++j) {
    double pj = 0.0;
    for (double v : plane(j)) pj += v * v;
    acc += w[j] * pj;
  }
  return std::sqrt(acc * grid_.dt() * grid_.cell_volume());
}

double ExtensionField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------

bool Box::contains(std::array<double, 2> p, int n, double slack) const {
  for (int a = 0; a < n; ++a)
    if (p[a] < lo[a] - slack || p[a] > hi[a] + slack) return false;
  return true;
}

DomainMasks::DomainMasks(const Grid& grid, Box omega, Box w) : omega_box_(omega), w_box_(w) {
  const int n = grid.dim();
  const double h = grid.dx();
  const double eps = 1e-9 * h;
  for (int a = 0; a < n; ++a) {
    if (!(omega.lo[a] < omega.hi[a]) || !(w.lo[a] <= w.hi[a]))
      throw InvalidArgument("masks: empty box");
    for (double c : {omega.lo[a], omega.hi[a]}) {
      const double r = (c + grid.spec().L) / h;
      if (std::abs(r - std::round(r)) > 1e-9)
        throw InvalidArgument("masks: the faces of Omega must lie on lattice lines");
      if (c <= -grid.spec().L + h || c >= grid.spec().L - h)
        throw InvalidArgument("masks: Omega must lie inside the box");
    }
  }
  const std::size_t N = grid.spatial_size();
  omega_.assign(N, 0);
  closure_.assign(N, 0);
  w_.assign(N, 0);
  for (std::size_t i = 0; i < N; ++i) {
    const auto p = grid.point(i);
    if (omega.contains(p, n, eps)) {
      closure_[i] = 1;
      bool interior = true;
      for (int a = 0; a < n; ++a)
        if (p[a] <= omega.lo[a] + eps || p[a] >= omega.hi[a] - eps) interior = false;
      omega_[i] = interior ? 1 : 0;
      if (!interior) {
        std::array<double, 2> nu{0.0, 0.0};
        for (int a = 0; a < n; ++a) {
          if (std::abs(p[a] - omega.lo[a]) <= eps) nu[a] = -1.0;
          if (std::abs(p[a] - omega.hi[a]) <= eps) nu[a] = 1.0;
        }
        const double len = std::hypot(nu[0], nu[1]);
        boundary_.push_back({i, {nu[0] / len, nu[1] / len}});
      }
    }
    if (w.contains(p, n, eps)) w_[i] = 1;
  }
  // Closure separation of at least two cells, measured in the max norm.
  double sep = 1e300;
  for (std::size_t i = 0; i < N; ++i) {
    if (!w_[i]) continue;
    if (closure_[i]) throw InvalidArgument("masks: Omega and W overlap");
    const auto p = grid.point(i);
    double d = 0.0;
    for (int a = 0; a < n; ++a)
      d = std::max(d, std::max({omega.lo[a] - p[a], p[a] - omega.hi[a], 0.0}));
    sep = std::min(sep, d);
  }
  if (sep == 1e300) throw InvalidArgument("masks: W contains no lattice node");
  if (sep < 2.0 * h - eps) throw InvalidArgument("masks: W must be at least two cells away from Omega");
}

std::vector<std::size_t> DomainMasks::omega_nodes() const {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < omega_.size(); ++i)
    if (omega_[i]) r.push_back(i);
  return r;
}

std::vector<std::size_t> DomainMasks::w_nodes() const {
  std::vector<std::size_t> r;
  for (std::size_t i = 0; i < w_.size(); ++i)
    if (w_[i]) r.push_back(i);
  return r;
}

}  // namespace fpara
