#pragma once

#include <string>

#include "fpara/dnmap.hpp"
#include "fpara/grid.hpp"
#include "fpara/heat_kernel.hpp"

namespace fpara {

/// HDF5 containers. Every file carries the grid parameters as root attributes
/// (n, L, Nx, T, Nt, Ymax, Ny, grade, grid_hash).

/// Datasets "tau" and "p" (Ntau x Nsp x Nsp) plus attribute sigma_hash.
void write_kernel_tables(const std::string& path, const HeatKernel& kernel);

/// Dataset "values" (planes x Nt x Nsp), dataset "y", attribute s.
void write_extension_field(const std::string& path, const ExtensionField& field);

/// Datasets "entries", "row_nodes", "col_nodes"; attributes kind, s, nt, sigma_hash, grid_hash.
void write_dn_matrix(const std::string& path, const DNMatrix& dn);
DNMatrix read_dn_matrix(const std::string& path);

/// One row per boundary node and time sample: k, t, node, x0, x1, trace, flux.
void write_cauchy_pair_csv(const std::string& path, const CauchyPair& pair, const DomainMasks& masks);

}  // namespace fpara
