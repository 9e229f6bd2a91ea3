#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fpara {

/// Lattice parameters. Space is the box [-L, L)^n sampled at Nx points per
/// axis, time is [-T, T) sampled at Nt points, and the extension variable
/// uses y_j = Ymax (j/Ny)^grade for j = 0..Ny.
struct GridSpec {
  int n = 1;
  double L = 4.0;
  int Nx = 64;
  double T = 1.0;
  int Nt = 64;
  double Ymax = 0.0;  ///< 0 selects 10*sqrt(2T)
  int Ny = 64;
  double grade = 2.0;

  void validate() const;
  double y_max() const;
  /// Multiplies Nx, Nt and Ny by `factor`.
  GridSpec refined(int factor) const;
  bool operator==(const GridSpec&) const = default;
  std::string describe() const;
};

class Grid {
 public:
  explicit Grid(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.n; }
  int nx() const { return spec_.Nx; }
  int nt() const { return spec_.Nt; }
  int ny() const { return spec_.Ny; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  double cell_volume() const;
  std::size_t spatial_size() const { return spatial_size_; }
  std::size_t size() const { return spatial_size_ * static_cast<std::size_t>(spec_.Nt); }

  double x(int i) const { return -spec_.L + i * dx_; }
  double t(int k) const { return -spec_.T + k * dt_; }
  double y(int j) const { return y_[static_cast<std::size_t>(j)]; }
  std::span<const double> y_coords() const { return y_; }

  /// Nearest lattice index for a coordinate along one spatial axis.
  int x_index(double x) const;
  int t_index(double t) const;

  /// Spatial multi-index <-> flat index. Axis 0 varies slowest.
  std::array<int, 2> unflatten(std::size_t idx) const;
  std::size_t flatten(std::array<int, 2> multi) const;
  std::array<double, 2> point(std::size_t idx) const;

  bool operator==(const Grid& other) const { return spec_ == other.spec_; }

 private:
  GridSpec spec_;
  double dx_;
  double dt_;
  std::size_t spatial_size_;
  std::vector<double> y_;
};

Grid build_grid(const GridSpec& spec);

/// Causal fields vanish at every time sample with t <= -T. Periodic fields
/// live on the periodic time box and are only used by spectral diagnostics.
enum class TimeSupport { causal, periodic };

class SpaceTimeField {
 public:
  explicit SpaceTimeField(Grid grid, TimeSupport support = TimeSupport::causal);
  SpaceTimeField(Grid grid, std::vector<double> values,
                 TimeSupport support = TimeSupport::causal);

  /// Samples f(t, point) at every lattice node.
  template <class F>
  static SpaceTimeField sample(const Grid& grid, F&& f,
                               TimeSupport support = TimeSupport::causal) {
    std::vector<double> v(grid.size());
    for (int k = 0; k < grid.nt(); ++k)
      for (std::size_t i = 0; i < grid.spatial_size(); ++i)
        v[k * grid.spatial_size() + i] = f(grid.t(k), grid.point(i));
    return SpaceTimeField(grid, std::move(v), support);
  }

  const Grid& grid() const { return grid_; }
  TimeSupport support() const { return support_; }
  bool causal() const { return support_ == TimeSupport::causal; }

  double& operator()(int k, std::size_t i) { return values_[k * grid_.spatial_size() + i]; }
  double operator()(int k, std::size_t i) const {
    return values_[k * grid_.spatial_size() + i];
  }
  std::span<double> slice(int k);
  std::span<const double> slice(int k) const;
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Re-applies the support convention after in-place edits.
  void enforce_support();

  SpaceTimeField& operator+=(const SpaceTimeField& other);
  SpaceTimeField& operator-=(const SpaceTimeField& other);
  SpaceTimeField& operator*=(double a);

  /// Lattice L2 norm with measure dt * dx^n.
  double norm() const;
  double max_abs() const;

 private:
  void check_compatible(const SpaceTimeField& other) const;

  Grid grid_;
  TimeSupport support_;
  std::vector<double> values_;
};

SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator*(double c, SpaceTimeField a);

/// Relative lattice L2 distance ||a - b|| / ||ref||.
double relative_l2(const SpaceTimeField& a, const SpaceTimeField& b, const SpaceTimeField& ref);

/// ũ(t, x, y_j), stored plane by plane: plane j is a space-time slab at y_j.
class ExtensionField {
 public:
  ExtensionField(Grid grid, double s);

  const Grid& grid() const { return grid_; }
  double order() const { return s_; }
  int planes() const { return grid_.ny() + 1; }

  std::span<double> plane(int j);
  std::span<const double> plane(int j) const;
  double& at(int j, int k, std::size_t i) { return plane(j)[k * grid_.spatial_size() + i]; }
  double at(int j, int k, std::size_t i) const {
    return plane(j)[k * grid_.spatial_size() + i];
  }
  SpaceTimeField plane_field(int j) const;
  void set_plane(int j, const SpaceTimeField& f);

  /// Collects ũ(t, x, ·) along y.
  std::vector<double> column(int k, std::size_t i) const;

  /// L2 norm against y^{1-2s} dy dt dx, with the piecewise-linear product rule in y.
  double weighted_norm() const;
  double max_abs() const;

 private:
  Grid grid_;
  double s_;
  std::vector<double> values_;
};

/// Axis-aligned box [lo, hi] in the spatial lattice.
struct Box {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
  bool contains(std::array<double, 2> p, int n, double slack = 0.0) const;
};

struct BoundaryNode {
  std::size_t index;
  std::array<double, 2> normal;  ///< outward unit normal
};

/// Omega is an open box; its lattice boundary nodes must lie exactly on the
/// box faces. W is a closed box in the exterior.
class DomainMasks {
 public:
  DomainMasks(const Grid& grid, Box omega, Box w);

  const Box& omega_box() const { return omega_box_; }
  const Box& w_box() const { return w_box_; }
  const std::vector<char>& omega() const { return omega_; }
  const std::vector<char>& w_set() const { return w_; }
  const std::vector<BoundaryNode>& boundary() const { return boundary_; }
  std::vector<std::size_t> omega_nodes() const;
  std::vector<std::size_t> w_nodes() const;
  bool in_omega(std::size_t i) const { return omega_[i] != 0; }
  bool in_closure(std::size_t i) const { return closure_[i] != 0; }
  bool in_w(std::size_t i) const { return w_[i] != 0; }

 private:
  Box omega_box_;
  Box w_box_;
  std::vector<char> omega_;
  std::vector<char> closure_;
  std::vector<char> w_;
  std::vector<BoundaryNode> boundary_;
};

}  // namespace fpara
