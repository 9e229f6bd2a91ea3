#include "fpara/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "fpara/diagnostics.hpp"

namespace fpara {
namespace {

struct PlanKey {
  std::vector<int> shape;
  int sign;
  int howmany;
  bool operator<(const PlanKey& o) const {
    return std::tie(shape, sign, howmany) < std::tie(o.shape, o.sign, o.howmany);
  }
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }
  // Plans are created on a scratch buffer and executed through the new-array
  // interface, so they are reusable for any unaligned array of the same shape.
  fftw_plan get(const PlanKey& key) {
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t total = static_cast<std::size_t>(key.howmany);
    for (int d : key.shape) total *= static_cast<std::size_t>(d);
    std::vector<cplx> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p;
    const int rank = static_cast<int>(key.shape.size());
    int dist = 1;
    for (int d : key.shape) dist *= d;
    p = fftw_plan_many_dft(rank, key.shape.data(), key.howmany, buf, nullptr, 1, dist, buf,
                           nullptr, 1, dist, key.sign, flags);
    if (!p) throw NumericalFailure("fft: planner failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft_inplace(std::vector<cplx>& data, const std::vector<int>& shape, int sign) {
  std::size_t total = 1;
  for (int d : shape) total *= static_cast<std::size_t>(d);
  if (total != data.size()) throw InvalidArgument("fft: shape does not match data");
  fftw_plan p = cache().get({shape, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, 1});
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, buf, buf);
}

void fft_batch(cplx* data, const std::vector<int>& shape, int batch, int sign) {
  if (batch <= 0) return;
  fftw_plan p = cache().get({shape, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, batch});
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, buf, buf);
}

double angular_frequency(int k, int n, double h) {
  const int kk = k <= n / 2 ? k : k - n;
  return 2.0 * std::numbers::pi * kk / (n * h);
}

double SpectralArray::norm() const {
  double acc = 0.0;
  for (const auto& v : values) acc += std::norm(v);
  return std::sqrt(acc);
}

namespace {

std::vector<int> field_shape(const Grid& g) {
  std::vector<int> shape{g.nt()};
  for (int a = 0; a < g.dim(); ++a) shape.push_back(g.nx());
  return shape;
}

}  // namespace

SpectralArray fourier_forward(const SpaceTimeField& u) {
  SpectralArray a;
  a.shape = field_shape(u.grid());
  a.values.assign(u.values().begin(), u.values().end());
  fft_inplace(a.values, a.shape, -1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(a.values.size()));
  for (auto& v : a.values) v *= scale;
  return a;
}

SpaceTimeField fourier_inverse(const SpectralArray& a, const Grid& grid, TimeSupport support,
                               double* imag_residue) {
  if (a.shape != field_shape(grid)) throw InvalidArgument("fourier_inverse: shape mismatch");
  std::vector<cplx> work = a.values;
  fft_inplace(work, a.shape, +1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(work.size()));
  std::vector<double> re(work.size());
  double im = 0.0;
  for (std::size_t i = 0; i < work.size(); ++i) {
    re[i] = work[i].real() * scale;
    im = std::max(im, std::abs(work[i].imag() * scale));
  }
  if (imag_residue) *imag_residue = im;
  return SpaceTimeField(grid, std::move(re), support);
}

}  // namespace fpara
