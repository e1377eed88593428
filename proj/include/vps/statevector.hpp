#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vps/common.hpp"
#include "vps/density_matrix.hpp"
#include "vps/pauli.hpp"

namespace vps {

struct StateVector {
  std::vector<cx> amps;
  int n_qubits = 0;

  StateVector() = default;
  explicit StateVector(int n) : n_qubits(n) {
    if (n < 1) throw std::invalid_argument("state needs at least one qubit");
    if (n > kMaxQubits)
      throw CapacityError("dense simulation capped at " + std::to_string(kMaxQubits) + " qubits");
    amps.assign(std::uint64_t{1} << n, cx{0, 0});
    amps[0] = cx{1, 0};
  }

  std::uint64_t dim() const { return amps.size(); }

  double norm_sq() const {
    double s = 0.0;
    for (const cx& a : amps) s += std::norm(a);
    return s;
  }
};

enum class GateKind { H, X, Rx, Ry, Rz, Rzz, Rswap, SU2 };

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::Rx: return "rx";
    case GateKind::Ry: return "ry";
    case GateKind::Rz: return "rz";
    case GateKind::Rzz: return "rzz";
    case GateKind::Rswap: return "rswap";
    case GateKind::SU2: return "su2";
  }
  return "?";
}

inline int gate_wire_count(GateKind k) {
  return (k == GateKind::Rzz || k == GateKind::Rswap) ? 2 : 1;
}

inline int gate_slot_count(GateKind k) {
  switch (k) {
    case GateKind::H:
    case GateKind::X: return 0;
    case GateKind::SU2: return 3;
    default: return 1;
  }
}

// Rotation conventions follow e^{i theta P}: Rz = e^{i theta Z},
// Rzz = e^{i theta Z_i Z_j}, Rswap = e^{i theta SWAP}, Rx/Ry analogous.
// SU2 is the three-angle composition Rz(c) Ry(b) Rz(a), a applied first.
struct Gate {
  GateKind kind;
  int wires[2] = {-1, -1};
  int slots[3] = {-1, -1, -1};

  static Gate one(GateKind k, int wire, int slot = -1) {
    Gate g;
    g.kind = k;
    g.wires[0] = wire;
    g.slots[0] = slot;
    return g;
  }
  static Gate two(GateKind k, int w0, int w1, int slot) {
    Gate g;
    g.kind = k;
    g.wires[0] = w0;
    g.wires[1] = w1;
    g.slots[0] = slot;
    return g;
  }
  static Gate su2(int wire, int s0, int s1, int s2) {
    Gate g;
    g.kind = GateKind::SU2;
    g.wires[0] = wire;
    g.slots[0] = s0;
    g.slots[1] = s1;
    g.slots[2] = s2;
    return g;
  }
};

// Post-selection target: either a computational bitstring on the listed
// wires, or an explicit normalized state over them (Bell-pair projection).
struct PostSelection {
  std::vector<int> wires;
  std::variant<std::uint64_t, std::vector<cx>> target;

  static PostSelection bits(std::vector<int> w, std::uint64_t outcome) {
    PostSelection p;
    p.wires = std::move(w);
    p.target = outcome;
    return p;
  }
  static PostSelection state(std::vector<int> w, std::vector<cx> s) {
    PostSelection p;
    p.wires = std::move(w);
    if (s.size() != (std::uint64_t{1} << p.wires.size()))
      throw std::invalid_argument("post-selection target dimension mismatch");
    double n2 = 0.0;
    for (const cx& a : s) n2 += std::norm(a);
    if (std::abs(n2 - 1.0) > 1e-12)
      throw std::invalid_argument("post-selection target state must be normalized");
    p.target = std::move(s);
    return p;
  }
};

namespace detail {

inline void check_wire(const StateVector& psi, int wire) {
  if (wire < 0 || wire >= psi.n_qubits)
    throw std::invalid_argument("wire " + std::to_string(wire) + " out of range");
}

// Generic single-qubit unitary [[u00,u01],[u10,u11]].
inline void apply_1q(StateVector& psi, int wire, cx u00, cx u01, cx u10, cx u11) {
  check_wire(psi, wire);
  const std::uint64_t stride = bitmask_of(wire, psi.n_qubits);
  const std::uint64_t dim = psi.dim();
  for (std::uint64_t base = 0; base < dim; base += 2 * stride)
    for (std::uint64_t off = 0; off < stride; ++off) {
      std::uint64_t i0 = base + off;
      std::uint64_t i1 = i0 + stride;
      cx a0 = psi.amps[i0], a1 = psi.amps[i1];
      psi.amps[i0] = u00 * a0 + u01 * a1;
      psi.amps[i1] = u10 * a0 + u11 * a1;
    }
}

inline void apply_rzz(StateVector& psi, int w0, int w1, double theta) {
  check_wire(psi, w0);
  check_wire(psi, w1);
  if (w0 == w1) throw std::invalid_argument("rzz wires must differ");
  const std::uint64_t m0 = bitmask_of(w0, psi.n_qubits);
  const std::uint64_t m1 = bitmask_of(w1, psi.n_qubits);
  const cx plus{std::cos(theta), std::sin(theta)};
  const cx minus = std::conj(plus);
  const std::uint64_t dim = psi.dim();
  for (std::uint64_t i = 0; i < dim; ++i) {
    bool equal = ((i & m0) != 0) == ((i & m1) != 0);
    psi.amps[i] *= equal ? plus : minus;
  }
}

// e^{i theta SWAP}: phase e^{i theta} on the symmetric diagonal, 2x2 mix
// of cos/i sin on the |01>,|10> block.
inline void apply_rswap(StateVector& psi, int w0, int w1, double theta) {
  check_wire(psi, w0);
  check_wire(psi, w1);
  if (w0 == w1) throw std::invalid_argument("rswap wires must differ");
  const std::uint64_t m0 = bitmask_of(w0, psi.n_qubits);
  const std::uint64_t m1 = bitmask_of(w1, psi.n_qubits);
  const cx diag{std::cos(theta), std::sin(theta)};
  const cx c{std::cos(theta), 0.0};
  const cx is{0.0, std::sin(theta)};
  const std::uint64_t dim = psi.dim();
  for (std::uint64_t i = 0; i < dim; ++i) {
    bool b0 = (i & m0) != 0, b1 = (i & m1) != 0;
    if (b0 == b1) {
      psi.amps[i] *= diag;
    } else if (b0 && !b1) {  // visit each off-diagonal pair once, from |10>
      std::uint64_t j = (i ^ m0) | m1;
      cx a10 = psi.amps[i], a01 = psi.amps[j];
      psi.amps[i] = c * a10 + is * a01;
      psi.amps[j] = is * a10 + c * a01;
    }
  }
}

}  // namespace detail

// Applies one gate; params supplies the rotation angles by slot index.
inline void apply_gate(StateVector& psi, const Gate& g, std::span<const double> params) {
  auto angle = [&](int slot_pos) {
    int slot = g.slots[slot_pos];
    if (slot < 0 || slot >= static_cast<int>(params.size()))
      throw std::invalid_argument("gate parameter slot " + std::to_string(slot) +
                                  " not resolvable");
    return params[static_cast<std::size_t>(slot)];
  };
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  switch (g.kind) {
    case GateKind::H:
      detail::apply_1q(psi, g.wires[0], inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2);
      break;
    case GateKind::X:
      detail::apply_1q(psi, g.wires[0], 0, 1, 1, 0);
      break;
    case GateKind::Rx: {
      double t = angle(0);
      detail::apply_1q(psi, g.wires[0], {std::cos(t), 0}, {0, std::sin(t)}, {0, std::sin(t)},
                       {std::cos(t), 0});
      break;
    }
    case GateKind::Ry: {
      double t = angle(0);
      detail::apply_1q(psi, g.wires[0], {std::cos(t), 0}, {std::sin(t), 0}, {-std::sin(t), 0},
                       {std::cos(t), 0});
      break;
    }
    case GateKind::Rz: {
      double t = angle(0);
      detail::apply_1q(psi, g.wires[0], {std::cos(t), std::sin(t)}, 0, 0,
                       {std::cos(t), -std::sin(t)});
      break;
    }
    case GateKind::Rzz:
      detail::apply_rzz(psi, g.wires[0], g.wires[1], angle(0));
      break;
    case GateKind::Rswap:
      detail::apply_rswap(psi, g.wires[0], g.wires[1], angle(0));
      break;
    case GateKind::SU2: {
      apply_gate(psi, Gate::one(GateKind::Rz, g.wires[0], g.slots[0]), params);
      apply_gate(psi, Gate::one(GateKind::Ry, g.wires[0], g.slots[1]), params);
      apply_gate(psi, Gate::one(GateKind::Rz, g.wires[0], g.slots[2]), params);
      break;
    }
  }
}

inline void apply_gate_adjoint(StateVector& psi, const Gate& g, std::span<const double> params) {
  switch (g.kind) {
    case GateKind::H:
    case GateKind::X:
      apply_gate(psi, g, params);  // self-inverse
      break;
    case GateKind::SU2: {
      std::array<double, 3> neg;
      for (int k = 0; k < 3; ++k) neg[static_cast<std::size_t>(k)] = -params[static_cast<std::size_t>(g.slots[k])];
      Gate rz0 = Gate::one(GateKind::Rz, g.wires[0], 2);
      Gate ry = Gate::one(GateKind::Ry, g.wires[0], 1);
      Gate rz1 = Gate::one(GateKind::Rz, g.wires[0], 0);
      apply_gate(psi, rz0, neg);
      apply_gate(psi, ry, neg);
      apply_gate(psi, rz1, neg);
      break;
    }
    default: {
      double t = -params[static_cast<std::size_t>(g.slots[0])];
      Gate neg_g = g;
      neg_g.slots[0] = 0;
      std::array<double, 1> one{t};
      apply_gate(psi, neg_g, one);
      break;
    }
  }
}

// y += coeff * P |psi> for one Pauli word (used by expectations and by
// objective seeds). P acts on the wires recorded in the string itself.
inline void accumulate_pauli_apply(const PauliString& s, cx coeff, const StateVector& psi,
                                   std::vector<cx>& y) {
  const int n = psi.n_qubits;
  std::uint64_t flip = 0, y_mask = 0, sign_mask = 0;
  int y_count = 0;
  for (const auto& [q, ax] : s.ops) {
    std::uint64_t bm = bitmask_of(q, n);
    switch (ax) {
      case PauliAxis::X: flip |= bm; break;
      case PauliAxis::Y: flip |= bm; y_mask |= bm; ++y_count; break;
      case PauliAxis::Z: sign_mask |= bm; break;
    }
  }
  sign_mask |= y_mask;
  cx base = coeff;
  for (int k = 0; k < (y_count & 3); ++k) base *= cx{0, 1};
  const std::uint64_t dim = psi.dim();
  for (std::uint64_t b = 0; b < dim; ++b) {
    cx amp = base * psi.amps[b];
    if (__builtin_popcountll(b & sign_mask) & 1) amp = -amp;
    y[b ^ flip] += amp;
  }
}

inline std::vector<cx> pauli_sum_apply(const PauliSum& h, const StateVector& psi) {
  if (h.n_qubits != psi.n_qubits)
    throw std::invalid_argument("pauli_sum_apply: qubit count mismatch");
  std::vector<cx> y(psi.dim(), cx{0, 0});
  for (const auto& [c, s] : h.terms) accumulate_pauli_apply(s, cx{c, 0}, psi, y);
  return y;
}

// <psi|H|psi>. H must already live on the same register (use
// PauliSum::embed to pad a system-only observable onto ancilla wires).
inline double expectation(const StateVector& psi, const PauliSum& h) {
  if (h.n_qubits != psi.n_qubits)
    throw std::invalid_argument("expectation: operator on " + std::to_string(h.n_qubits) +
                                " qubits vs state on " + std::to_string(psi.n_qubits));
  auto y = pauli_sum_apply(h, psi);
  cx e{0, 0};
  for (std::uint64_t b = 0; b < psi.dim(); ++b) e += std::conj(psi.amps[b]) * y[b];
  if (std::abs(e.imag()) > 1e-9)
    throw SimError("expectation has imaginary residue " + std::to_string(e.imag()));
  return e.real();
}

namespace detail {

// Scatter tables mapping a sub-register index to its bits' positions in the
// full index. kept[r] | env[e] enumerates the full register.
inline std::vector<std::uint64_t> scatter_table(const std::vector<int>& wires, int n_qubits) {
  const std::uint64_t dim = std::uint64_t{1} << wires.size();
  std::vector<std::uint64_t> table(dim, 0);
  for (std::uint64_t r = 0; r < dim; ++r) {
    std::uint64_t full = 0;
    for (std::size_t k = 0; k < wires.size(); ++k)
      if ((r >> (wires.size() - 1 - k)) & 1u) full |= bitmask_of(wires[k], n_qubits);
    table[r] = full;
  }
  return table;
}

inline std::vector<int> complement_wires(const std::vector<int>& wires, int n_qubits) {
  std::vector<bool> used(static_cast<std::size_t>(n_qubits), false);
  for (int w : wires) used[static_cast<std::size_t>(w)] = true;
  std::vector<int> rest;
  for (int q = 0; q < n_qubits; ++q)
    if (!used[static_cast<std::size_t>(q)]) rest.push_back(q);
  return rest;
}

}  // namespace detail

// Projects the listed wires onto the target and renormalizes; returns the
// reduced state on the remaining wires (in their original order) plus the
// projection probability.
inline std::pair<StateVector, double> post_select(const StateVector& psi,
                                                  const PostSelection& sel) {
  for (int w : sel.wires) detail::check_wire(psi, w);
  if (sel.wires.empty()) return {psi, 1.0};
  std::vector<int> sorted = sel.wires;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("post-selection wires must be distinct");

  auto keep = detail::complement_wires(sel.wires, psi.n_qubits);
  if (keep.empty()) throw std::invalid_argument("post-selection would discard every wire");
  auto keep_table = detail::scatter_table(keep, psi.n_qubits);
  auto sel_table = detail::scatter_table(sel.wires, psi.n_qubits);

  StateVector out(static_cast<int>(keep.size()));
  const std::uint64_t keep_dim = out.dim();
  if (std::holds_alternative<std::uint64_t>(sel.target)) {
    std::uint64_t outcome = std::get<std::uint64_t>(sel.target);
    if (outcome >= sel_table.size()) throw std::invalid_argument("post-selection outcome out of range");
    const std::uint64_t anchor = sel_table[outcome];
    for (std::uint64_t r = 0; r < keep_dim; ++r) out.amps[r] = psi.amps[keep_table[r] | anchor];
  } else {
    const auto& target = std::get<std::vector<cx>>(sel.target);
    for (std::uint64_t r = 0; r < keep_dim; ++r) {
      cx a{0, 0};
      for (std::uint64_t j = 0; j < target.size(); ++j)
        a += std::conj(target[j]) * psi.amps[keep_table[r] | sel_table[j]];
      out.amps[r] = a;
    }
  }
  double prob = out.norm_sq();
  if (prob < 1e-12)
    throw DegenerateProjectionError("post-selection probability " + std::to_string(prob) +
                                    " below 1e-12");
  const double inv = 1.0 / std::sqrt(prob);
  for (cx& a : out.amps) a *= inv;
  return {std::move(out), prob};
}

// Partial trace onto `keep` (result indexed in keep order).
inline DensityMatrix reduced_density_matrix(const StateVector& psi, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("reduced_density_matrix: empty keep list");
  for (int w : keep) detail::check_wire(psi, w);
  auto keep_table = detail::scatter_table(keep, psi.n_qubits);
  auto env = detail::complement_wires(keep, psi.n_qubits);
  auto env_table = detail::scatter_table(env, psi.n_qubits);
  DensityMatrix rho(static_cast<int>(keep.size()));
  const std::uint64_t kd = rho.dim();
  for (std::uint64_t e = 0; e < env_table.size(); ++e) {
    const std::uint64_t base = env_table[e];
    for (std::uint64_t r = 0; r < kd; ++r) {
      cx ar = psi.amps[keep_table[r] | base];
      if (ar == cx{0, 0}) continue;
      for (std::uint64_t c = 0; c < kd; ++c)
        rho.at(r, c) += ar * std::conj(psi.amps[keep_table[c] | base]);
    }
  }
  return rho;
}

// i.i.d. samples of full-register bitstrings from |amps|^2.
inline std::vector<std::string> sample_bitstrings(const StateVector& psi, int shots,
                                                  std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample_bitstrings: shots must be >= 1");
  std::vector<double> cdf(psi.dim());
  double acc = 0.0;
  for (std::uint64_t b = 0; b < psi.dim(); ++b) {
    acc += std::norm(psi.amps[b]);
    cdf[b] = acc;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, acc);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(shots));
  for (int s = 0; s < shots; ++s) {
    double u = unit(rng);
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    std::uint64_t idx = static_cast<std::uint64_t>(it - cdf.begin());
    if (idx >= psi.dim()) idx = psi.dim() - 1;
    out.push_back(index_to_bitstring(idx, psi.n_qubits));
  }
  return out;
}

}  // namespace vps
