#include "fpara/archive.hpp"

#include <H5Cpp.h>

#include <fstream>
#include <iomanip>
#include <limits>

#include "fpara/diagnostics.hpp"

namespace fpara {

namespace {

template <class T>
H5::PredType h5_type();
template <>
H5::PredType h5_type<double>() {
  return H5::PredType::NATIVE_DOUBLE;
}
template <>
H5::PredType h5_type<int>() {
  return H5::PredType::NATIVE_INT;
}
template <>
H5::PredType h5_type<std::uint64_t>() {
  return H5::PredType::NATIVE_UINT64;
}

template <class T>
void put_attr(H5::H5File& f, const char* name, T value) {
  H5::DataSpace sp(H5S_SCALAR);
  f.createAttribute(name, h5_type<T>(), sp).write(h5_type<T>(), &value);
}

template <class T>
T get_attr(const H5::H5File& f, const char* name) {
  T v{};
  f.openAttribute(name).read(h5_type<T>(), &v);
  return v;
}

void put_string(H5::H5File& f, const char* name, const std::string& value) {
  H5::StrType t(H5::PredType::C_S1, value.size() + 1);
  H5::DataSpace sp(H5S_SCALAR);
  f.createAttribute(name, t, sp).write(t, value.c_str());
}

std::string get_string(const H5::H5File& f, const char* name) {
  H5::Attribute a = f.openAttribute(name);
  std::string out;
  a.read(a.getStrType(), out);
  return out;
}

template <class T>
void put_data(H5::H5File& f, const char* name, const T* data, std::initializer_list<hsize_t> dims) {
  std::vector<hsize_t> d(dims);
  H5::DataSpace sp(static_cast<int>(d.size()), d.data());
  f.createDataSet(name, h5_type<T>(), sp).write(data, h5_type<T>());
}

template <class T>
std::vector<T> get_data(const H5::H5File& f, const char* name, std::vector<hsize_t>& dims) {
  H5::DataSet ds = f.openDataSet(name);
  H5::DataSpace sp = ds.getSpace();
  dims.assign(static_cast<std::size_t>(sp.getSimpleExtentNdims()), 0);
  sp.getSimpleExtentDims(dims.data());
  hsize_t total = 1;
  for (hsize_t d : dims) total *= d;
  std::vector<T> out(total);
  ds.read(out.data(), h5_type<T>());
  return out;
}

void put_grid(H5::H5File& f, const Grid& g) {
  const GridSpec& s = g.spec();
  put_attr(f, "n", s.n);
  put_attr(f, "L", s.L);
  put_attr(f, "Nx", s.Nx);
  put_attr(f, "T", s.T);
  put_attr(f, "Nt", s.Nt);
  put_attr(f, "Ymax", s.y_max());
  put_attr(f, "Ny", s.Ny);
  put_attr(f, "grade", s.grade);
  put_attr(f, "grid_hash", grid_hash(g));
}

template <class Fn>
void guarded(const std::string& path, Fn fn) {
  // The library's own error stack print is redundant with the rethrow below.
  H5::Exception::dontPrint();
  try {
    fn();
  } catch (const H5::Exception& e) {
    throw NumericalFailure("archive " + path + ": " + e.getDetailMsg());
  }
}

std::vector<std::uint64_t> as_u64(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

void write_kernel_tables(const std::string& path, const HeatKernel& kernel) {
  guarded(path, [&] {
    H5::H5File f(path, H5F_ACC_TRUNC);
    put_grid(f, kernel.grid());
    put_attr(f, "sigma_hash", kernel.sigma().hash());
    const auto& taus = kernel.taus();
    const hsize_t m = taus.size(), N = kernel.grid().spatial_size();
    put_data(f, "tau", taus.data(), {m});
    std::vector<double> p;
    p.reserve(m * N * N);
    for (const auto& P : kernel.tables())
      for (hsize_t i = 0; i < N; ++i)
        for (hsize_t j = 0; j < N; ++j) p.push_back(P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    put_data(f, "p", p.data(), {m, N, N});
  });
}

void write_extension_field(const std::string& path, const ExtensionField& field) {
  guarded(path, [&] {
    const Grid& g = field.grid();
    H5::H5File f(path, H5F_ACC_TRUNC);
    put_grid(f, g);
    put_attr(f, "s", field.order());
    const hsize_t P = static_cast<hsize_t>(field.planes()), Nt = static_cast<hsize_t>(g.nt()),
                  N = g.spatial_size();
    std::vector<double> v;
    v.reserve(P * Nt * N);
    for (int j = 0; j < field.planes(); ++j) {
      const auto pl = field.plane(j);
      v.insert(v.end(), pl.begin(), pl.end());
    }
    put_data(f, "values", v.data(), {P, Nt, N});
    const auto y = g.y_coords();
    put_data(f, "y", y.data(), {static_cast<hsize_t>(y.size())});
  });
}

void write_dn_matrix(const std::string& path, const DNMatrix& dn) {
  guarded(path, [&] {
    H5::H5File f(path, H5F_ACC_TRUNC);
    put_string(f, "kind", dn.kind == DNKind::local ? "local" : "nonlocal");
    put_attr(f, "s", dn.s);
    put_attr(f, "nt", dn.nt);
    put_attr(f, "sigma_hash", dn.sigma_hash);
    put_attr(f, "grid_hash", dn.grid_hash);
    const auto rows = as_u64(dn.row_nodes), cols = as_u64(dn.col_nodes);
    put_data(f, "row_nodes", rows.data(), {rows.size()});
    put_data(f, "col_nodes", cols.data(), {cols.size()});
    // Row-major on disk.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> e = dn.entries;
    put_data(f, "entries", e.data(), {static_cast<hsize_t>(e.rows()), static_cast<hsize_t>(e.cols())});
  });
}

DNMatrix read_dn_matrix(const std::string& path) {
  DNMatrix dn;
  guarded(path, [&] {
    H5::H5File f(path, H5F_ACC_RDONLY);
    dn.kind = get_string(f, "kind") == "local" ? DNKind::local : DNKind::nonlocal;
    dn.s = get_attr<double>(f, "s");
    dn.nt = get_attr<int>(f, "nt");
    dn.sigma_hash = get_attr<std::uint64_t>(f, "sigma_hash");
    dn.grid_hash = get_attr<std::uint64_t>(f, "grid_hash");
    std::vector<hsize_t> dims;
    const auto rows = get_data<std::uint64_t>(f, "row_nodes", dims);
    const auto cols = get_data<std::uint64_t>(f, "col_nodes", dims);
    dn.row_nodes.assign(rows.begin(), rows.end());
    dn.col_nodes.assign(cols.begin(), cols.end());
    const auto e = get_data<double>(f, "entries", dims);
    if (dims.size() != 2) throw NumericalFailure("archive " + path + ": entries must be two-dimensional");
    dn.entries = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        e.data(), static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
  });
  return dn;
}

void write_cauchy_pair_csv(const std::string& path, const CauchyPair& pair, const DomainMasks& masks) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("write_cauchy_pair_csv: cannot open " + path);
  const Grid& g = pair.v.grid();
  out << "k,t,node,x0,x1,trace,flux\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto& bd = masks.boundary();
  for (int k = 0; k < g.nt(); ++k)
    for (std::size_t b = 0; b < bd.size(); ++b) {
      const Point x = g.point(bd[b].index);
      out << k << ',' << g.t(k) << ',' << bd[b].index << ',' << x[0] << ',' << x[1] << ',' << pair.trace(k, b) << ','
          << pair.flux(k, b) << '\n';
    }
}

}  // namespace fpara
