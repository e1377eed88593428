#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vps/circuit.hpp"
#include "vps/density_matrix.hpp"
#include "vps/eigensolver.hpp"
#include "vps/neural.hpp"
#include "vps/pauli.hpp"
#include "vps/statevector.hpp"

namespace vps {

namespace detail {

// rho_ij = sum_m psi_im f(m) psi*_jm over ancilla outcomes m; the result is
// divided by its trace (the estimator's denominator does the same job on
// hardware). Branch columns are gathered through scatter tables.
inline DensityMatrix weighted_mixture(const StateVector& psi, const std::vector<int>& system,
                                      const std::vector<int>& ancilla,
                                      std::span<const double> f) {
  auto sys_table = scatter_table(system, psi.n_qubits);
  auto anc_table = scatter_table(ancilla, psi.n_qubits);
  if (f.size() != anc_table.size())
    throw std::invalid_argument("weight vector does not match ancilla count");
  DensityMatrix rho(static_cast<int>(system.size()));
  const std::uint64_t sd = rho.dim();
  std::vector<cx> branch(sd);
  for (std::uint64_t m = 0; m < anc_table.size(); ++m) {
    if (f[m] == 0.0) continue;
    for (std::uint64_t i = 0; i < sd; ++i) branch[i] = psi.amps[sys_table[i] | anc_table[m]];
    for (std::uint64_t i = 0; i < sd; ++i) {
      if (branch[i] == cx{0, 0}) continue;
      const cx lhs = f[m] * branch[i];
      for (std::uint64_t j = 0; j < sd; ++j) rho.at(i, j) += lhs * std::conj(branch[j]);
    }
  }
  double trace = rho.trace_real();
  if (trace <= 0.0) throw SimError("assembled state has non-positive trace");
  for (cx& v : rho.mat) v /= trace;
  return rho;
}

inline std::vector<cx> matmul(const std::vector<cx>& a, const std::vector<cx>& b, std::size_t n) {
  std::vector<cx> c(n * n, cx{0, 0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      cx aik = a[i * n + k];
      if (aik == cx{0, 0}) continue;
      const cx* brow = &b[k * n];
      cx* crow = &c[i * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  return c;
}

// f(A) for Hermitian A via eigendecomposition, eigenvalues clamped at 0
// before applying fn (PSD repair for matrix square roots and logs).
inline std::vector<cx> hermitian_function(const std::vector<cx>& a, std::size_t n,
                                          const std::function<double(double)>& fn) {
  auto dec = eigh(a, n, true);
  std::vector<cx> out(n * n, cx{0, 0});
  for (std::size_t k = 0; k < n; ++k) {
    double lam = fn(std::max(0.0, dec.eigenvalues[k]));
    if (lam == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      cx lhs = lam * dec.vector_entry(i, k);
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += lhs * std::conj(dec.vector_entry(j, k));
    }
  }
  return out;
}

}  // namespace detail

// Mixed state from a thermal circuit plus reweighter. With f uniform this
// reduces to the partial trace over the ancilla wires.
inline DensityMatrix assemble_mixed_state(const CircuitIR& circuit, std::span<const double> params,
                                          const Reweighter& r, std::span<const double> r_weights) {
  if (circuit.post_selection)
    throw std::invalid_argument("assemble_mixed_state expects a circuit without post-selection");
  if (circuit.ancilla_wires.empty())
    throw std::invalid_argument("assemble_mixed_state needs ancilla wires");
  if (r.n_bits() != static_cast<int>(circuit.ancilla_wires.size()))
    throw std::invalid_argument("reweighter input size must match ancilla count");
  StateVector psi = simulate(circuit, params);
  auto f = reweight_all(r, r_weights);
  return detail::weighted_mixture(psi, circuit.system_wires, circuit.ancilla_wires, f);
}

inline DensityMatrix assemble_mixed_state(const CircuitIR& circuit, std::span<const double> params,
                                          const Reweighter& r) {
  return assemble_mixed_state(circuit, params, r, r.weights);
}

// Uhlmann fidelity (Tr sqrt(sqrt(rho0) rho sqrt(rho0)))^2.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& rho0) {
  if (rho.n_qubits != rho0.n_qubits) throw std::invalid_argument("fidelity: dimension mismatch");
  const std::size_t n = rho.dim();
  auto sqrt0 = detail::hermitian_function(rho0.mat, n, [](double x) { return std::sqrt(x); });
  auto inner = detail::matmul(detail::matmul(sqrt0, rho.mat, n), sqrt0, n);
  auto dec = eigh(inner, n, false);
  double acc = 0.0;
  for (double lam : dec.eigenvalues) acc += std::sqrt(std::max(0.0, lam));
  return acc * acc;
}

// (1/2) sum |eigenvalues(rho - sigma)|.
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.n_qubits != sigma.n_qubits)
    throw std::invalid_argument("trace_distance: dimension mismatch");
  const std::size_t n = rho.dim();
  std::vector<cx> diff(n * n);
  for (std::size_t k = 0; k < n * n; ++k) diff[k] = rho.mat[k] - sigma.mat[k];
  auto dec = eigh(diff, n, false);
  double acc = 0.0;
  for (double lam : dec.eigenvalues) acc += std::abs(lam);
  return 0.5 * acc;
}

// e^{-beta H} / Z by exact diagonalization.
inline DensityMatrix exact_gibbs(const PauliSum& h, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("exact_gibbs: beta must be positive");
  auto dec = eigh(dense_matrix(h, 12), std::uint64_t{1} << h.n_qubits, true);
  const std::size_t n = dec.dim;
  const double e0 = dec.eigenvalues.front();
  std::vector<double> w(n);
  double z = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = std::exp(-beta * (dec.eigenvalues[k] - e0));
    z += w[k];
  }
  DensityMatrix rho(h.n_qubits);
  for (std::size_t k = 0; k < n; ++k) {
    double p = w[k] / z;
    if (p == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      cx lhs = p * dec.vector_entry(i, k);
      for (std::size_t j = 0; j < n; ++j) rho.at(i, j) += lhs * std::conj(dec.vector_entry(j, k));
    }
  }
  return rho;
}

struct ThermalOracleResult {
  DensityMatrix rho;
  double ebar = 0.0;
  std::vector<double> distribution;  // eigenstate weights, ascending-energy order
  double free_energy = 0.0;          // minimized F2
};

namespace detail {

inline double renyi2_profile_value(const std::vector<double>& energies, double beta, double ebar,
                                   std::vector<double>* out_weights = nullptr) {
  double zsum = 0.0;
  for (double e : energies) zsum += std::max(0.0, 1.0 - 0.5 * beta * (e - ebar));
  if (zsum <= 0.0) return std::numeric_limits<double>::infinity();
  double energy = 0.0, purity = 0.0;
  if (out_weights) out_weights->assign(energies.size(), 0.0);
  for (std::size_t k = 0; k < energies.size(); ++k) {
    double p = std::max(0.0, 1.0 - 0.5 * beta * (energies[k] - ebar)) / zsum;
    energy += p * energies[k];
    purity += p * p;
    if (out_weights) (*out_weights)[k] = p;
  }
  return energy + std::log(purity) / beta;
}

inline double golden_section(const std::function<double(double)>& fn, double a, double b,
                             double tol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Minimizer of the Renyi-2 free energy: weights follow the truncated linear
// profile p_i ∝ max(0, 1 - beta/2 (E_i - Ebar)). F2(Ebar) is piecewise
// smooth with kinks where weights hit zero, so the search scans kink
// candidates and a coarse grid, then refines by golden section.
inline ThermalOracleResult exact_renyi2(const PauliSum& h, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("exact_renyi2: beta must be positive");
  auto dec = eigh(dense_matrix(h, 12), std::uint64_t{1} << h.n_qubits, true);
  const std::vector<double>& energies = dec.eigenvalues;
  const double e_min = energies.front(), e_max = energies.back();
  auto f2_of = [&](double ebar) { return detail::renyi2_profile_value(energies, beta, ebar); };

  // candidates: kink points E_i - 2/beta, the spectrum itself, and a grid
  // stretching far enough above E_max that the flat-profile limit is
  // reachable at small beta
  const double hi = e_max + 4.0 / beta + (e_max - e_min) + 1.0;
  std::vector<double> candidates;
  for (double e : energies) {
    candidates.push_back(e);
    double kink = e - 2.0 / beta;
    if (kink > e_min - 1e-12) candidates.push_back(kink);
  }
  const int grid_points = 512;
  for (int g = 0; g <= grid_points; ++g)
    candidates.push_back(e_min + (hi - e_min) * g / grid_points);
  std::sort(candidates.begin(), candidates.end());
  double best_ebar = e_min, best_f2 = f2_of(e_min);
  for (double c : candidates) {
    double v = f2_of(c);
    if (v < best_f2) {
      best_f2 = v;
      best_ebar = c;
    }
  }
  // refine inside the bracket around the winner
  auto it = std::lower_bound(candidates.begin(), candidates.end(), best_ebar);
  double lo_b = (it == candidates.begin()) ? best_ebar - 1e-3 : *(it - 1);
  double hi_b = (it + 1 == candidates.end()) ? best_ebar + 1e-3 : *(it + 1);
  double ebar = detail::golden_section(f2_of, lo_b, hi_b, 1e-8);
  if (f2_of(ebar) > best_f2) ebar = best_ebar;

  ThermalOracleResult out;
  out.ebar = ebar;
  out.free_energy = detail::renyi2_profile_value(energies, beta, ebar, &out.distribution);
  out.rho = DensityMatrix(h.n_qubits);
  const std::size_t n = dec.dim;
  for (std::size_t k = 0; k < n; ++k) {
    double p = out.distribution[k];
    if (p == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      cx lhs = p * dec.vector_entry(i, k);
      for (std::size_t j = 0; j < n; ++j)
        out.rho.at(i, j) += lhs * std::conj(dec.vector_entry(j, k));
    }
  }
  return out;
}

// Tr(rho O) for an observable on the system register.
inline double density_matrix_expectation(const DensityMatrix& rho, const PauliSum& obs) {
  if (obs.n_qubits != rho.n_qubits)
    throw std::invalid_argument("density_matrix_expectation: size mismatch");
  auto m = dense_matrix(obs, 12);
  const std::size_t n = rho.dim();
  cx acc{0, 0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) acc += m[i * n + j] * rho.at(j, i);
  return acc.real();
}

// Reweighted estimator Cbar = <f(a) C(s)> / <f(a)> over measurement shots.
// `samples` are full-register bitstrings (system+ancilla interleaved as the
// circuit lays them out); the observable must be diagonal (Z/identity) on
// the system register, with any basis rotation applied before sampling.
inline double reweighted_correlation(const std::vector<std::string>& samples,
                                     const std::vector<int>& system_wires,
                                     const std::vector<int>& ancilla_wires, const Reweighter& r,
                                     std::span<const double> r_weights,
                                     const PauliSum& diagonal_obs) {
  if (samples.empty()) throw std::invalid_argument("reweighted_correlation: no samples");
  for (const auto& [c, s] : diagonal_obs.terms) {
    (void)c;
    for (const auto& [q, ax] : s.ops) {
      (void)q;
      if (ax != PauliAxis::Z)
        throw std::invalid_argument("reweighted_correlation needs a diagonal observable");
    }
  }
  const auto f = reweight_all(r, r_weights);
  double num = 0.0, den = 0.0;
  for (const std::string& shot : samples) {
    std::uint64_t anc_bits = 0;
    for (std::size_t k = 0; k < ancilla_wires.size(); ++k) {
      char c = shot.at(static_cast<std::size_t>(ancilla_wires[k]));
      anc_bits = (anc_bits << 1) | (c == '1');
    }
    double weight = f[anc_bits];
    double value = 0.0;
    for (const auto& [coeff, s] : diagonal_obs.terms) {
      int sign = 1;
      for (const auto& [q, ax] : s.ops) {
        (void)ax;
        if (shot.at(static_cast<std::size_t>(system_wires.at(static_cast<std::size_t>(q)))) == '1')
          sign = -sign;
      }
      value += coeff * sign;
    }
    num += weight * value;
    den += weight;
  }
  if (den <= 0.0) throw SimError("reweighted_correlation: vanishing weight sum");
  return num / den;
}

// Pre-processing baseline: classical model P(s) feeds product states into
// one unitary; branches stay orthogonal so the classical entropy equals the
// quantum entropy and the Gibbs free energy is exact.
inline std::pair<DensityMatrix, double> preprocessing_baseline(const CircuitIR& circuit,
                                                               std::span<const double> params,
                                                               const Reweighter& model,
                                                               const PauliSum& h, double beta) {
  if (!circuit.ancilla_wires.empty())
    throw std::invalid_argument("preprocessing_baseline expects a circuit without ancillas");
  if (model.n_bits() != circuit.n_qubits)
    throw std::invalid_argument("classical model must cover the full register");
  auto probs = reweight_all(model, model.weights);
  DensityMatrix rho(circuit.n_qubits);
  const std::uint64_t dim = rho.dim();
  double energy = 0.0;
  for (std::uint64_t s = 0; s < dim; ++s) {
    if (probs[s] == 0.0) continue;
    StateVector in(circuit.n_qubits);
    in.amps[0] = cx{0, 0};
    in.amps[s] = cx{1, 0};
    for (const Gate& g : circuit.gates) apply_gate(in, g, params);
    energy += probs[s] * expectation(in, h);
    for (std::uint64_t i = 0; i < dim; ++i) {
      cx lhs = probs[s] * in.amps[i];
      if (lhs == cx{0, 0}) continue;
      for (std::uint64_t j = 0; j < dim; ++j) rho.at(i, j) += lhs * std::conj(in.amps[j]);
    }
  }
  double gibbs_f = energy - classical_entropy(probs) / beta;
  return {std::move(rho), gibbs_f};
}

}  // namespace vps
