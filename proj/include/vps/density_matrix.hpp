#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "vps/common.hpp"

namespace vps {

// Dense Hermitian state on n_qubits system qubits, row-major.
struct DensityMatrix {
  std::vector<cx> mat;
  int n_qubits = 0;

  DensityMatrix() = default;
  explicit DensityMatrix(int n) : mat(dim_of(n) * dim_of(n), cx{0, 0}), n_qubits(n) {}

  static std::uint64_t dim_of(int n) { return std::uint64_t{1} << n; }
  std::uint64_t dim() const { return dim_of(n_qubits); }

  cx& at(std::uint64_t i, std::uint64_t j) { return mat[i * dim() + j]; }
  const cx& at(std::uint64_t i, std::uint64_t j) const { return mat[i * dim() + j]; }

  double trace_real() const {
    double t = 0.0;
    for (std::uint64_t i = 0; i < dim(); ++i) t += at(i, i).real();
    return t;
  }

  double hermiticity_defect() const {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < dim(); ++i)
      for (std::uint64_t j = i; j < dim(); ++j)
        worst = std::max(worst, std::abs(at(i, j) - std::conj(at(j, i))));
    return worst;
  }

  double frobenius_distance(const DensityMatrix& other) const {
    if (other.n_qubits != n_qubits) throw std::invalid_argument("dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < mat.size(); ++k) s += std::norm(mat[k] - other.mat[k]);
    return std::sqrt(s);
  }
};

inline double purity(const DensityMatrix& rho) {
  // Tr rho^2 = sum |rho_ij|^2 for Hermitian rho
  double s = 0.0;
  for (const cx& v : rho.mat) s += std::norm(v);
  return s;
}

// Checkpoint format: uint64 dimension header, then row-major (re, im) doubles.
// Written little-endian; this code targets little-endian hosts only.
inline void save_density_matrix(const DensityMatrix& rho, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimError("cannot open " + path + " for writing");
  std::uint64_t dim = rho.dim();
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(reinterpret_cast<const char*>(rho.mat.data()),
            static_cast<std::streamsize>(rho.mat.size() * sizeof(cx)));
  if (!out) throw SimError("short write to " + path);
}

inline DensityMatrix load_density_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimError("cannot open " + path);
  std::uint64_t dim = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  if (!in || dim == 0 || (dim & (dim - 1)) != 0)
    throw SimError(path + ": bad density-matrix header");
  int n = 0;
  while ((std::uint64_t{1} << n) < dim) ++n;
  DensityMatrix rho(n);
  in.read(reinterpret_cast<char*>(rho.mat.data()),
          static_cast<std::streamsize>(rho.mat.size() * sizeof(cx)));
  if (!in) throw SimError(path + ": truncated density matrix");
  return rho;
}

}  // namespace vps
