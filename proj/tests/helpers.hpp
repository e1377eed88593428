#pragma once

#include <random>
#include <vector>

#include "vps/pauli.hpp"
#include "vps/statevector.hpp"

namespace testutil {

inline vps::StateVector random_state(int n_qubits, std::mt19937_64& rng) {
  vps::StateVector psi(n_qubits);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& a : psi.amps) a = vps::cx{g(rng), g(rng)};
  double norm = std::sqrt(psi.norm_sq());
  for (auto& a : psi.amps) a /= norm;
  return psi;
}

inline vps::PauliSum random_pauli_sum(int n_qubits, int n_terms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_int_distribution<int> axis(0, 3);  // 3 = identity on that qubit
  vps::PauliSum sum(n_qubits);
  for (int t = 0; t < n_terms; ++t) {
    std::map<int, vps::PauliAxis> ops;
    for (int q = 0; q < n_qubits; ++q) {
      switch (axis(rng)) {
        case 0: ops[q] = vps::PauliAxis::X; break;
        case 1: ops[q] = vps::PauliAxis::Y; break;
        case 2: ops[q] = vps::PauliAxis::Z; break;
        default: break;
      }
    }
    sum.add_term(coeff(rng), vps::PauliString(std::move(ops), n_qubits));
  }
  sum.canonicalize();
  if (sum.terms.empty())
    sum.add_term(1.0, vps::PauliString({{0, vps::PauliAxis::Z}}, n_qubits));
  return sum;
}

// <psi|M|psi> for a dense row-major matrix; the slow oracle.
inline vps::cx dense_quadratic_form(const std::vector<vps::cx>& m, const vps::StateVector& psi) {
  const std::uint64_t dim = psi.dim();
  vps::cx acc{0, 0};
  for (std::uint64_t r = 0; r < dim; ++r) {
    vps::cx row{0, 0};
    for (std::uint64_t c = 0; c < dim; ++c) row += m[r * dim + c] * psi.amps[c];
    acc += std::conj(psi.amps[r]) * row;
  }
  return acc;
}

}  // namespace testutil
