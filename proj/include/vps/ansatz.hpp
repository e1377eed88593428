#pragma once

#include <vector>

#include "vps/circuit.hpp"

namespace vps {

// Hardware-efficient ansatz: one Hadamard layer, then P blocks of
// [ring-ladder Rzz (0,1),(1,2),...,(n-1,0), Rx on all wires, optionally Ry
// on all wires]. No ancillas.
inline CircuitIR build_hea(int n, int p_blocks, bool extra_ry = false) {
  if (n < 2) throw std::invalid_argument("build_hea: need at least 2 wires");
  if (p_blocks < 1) throw std::invalid_argument("build_hea: need at least 1 block");
  CircuitIR c;
  c.n_qubits = n;
  for (int i = 0; i < n; ++i) c.system_wires.push_back(i);
  int slot = 0;
  for (int i = 0; i < n; ++i) c.gates.push_back(Gate::one(GateKind::H, i));
  for (int p = 0; p < p_blocks; ++p) {
    for (int i = 0; i < n; ++i)
      c.gates.push_back(Gate::two(GateKind::Rzz, i, (i + 1) % n, slot++));
    for (int i = 0; i < n; ++i) c.gates.push_back(Gate::one(GateKind::Rx, i, slot++));
    if (extra_ry)
      for (int i = 0; i < n; ++i) c.gates.push_back(Gate::one(GateKind::Ry, i, slot++));
  }
  c.n_params = slot;
  c.validate();
  return c;
}

// All-to-one ansatz with one ancilla (wire n_sys): Hadamards on system
// wires, P blocks of [Rzz(i, ancilla) for each system i, Rx on every
// wire], then V(phi) as an SU2 rotation on the ancilla. Post-selects the
// ancilla in |0> (spin-up).
inline CircuitIR build_hea_postselect(int n_sys, int p_blocks) {
  if (n_sys < 2) throw std::invalid_argument("build_hea_postselect: need at least 2 system wires");
  if (p_blocks < 1) throw std::invalid_argument("build_hea_postselect: need at least 1 block");
  CircuitIR c;
  const int anc = n_sys;
  c.n_qubits = n_sys + 1;
  for (int i = 0; i < n_sys; ++i) c.system_wires.push_back(i);
  c.ancilla_wires.push_back(anc);
  int slot = 0;
  for (int i = 0; i < n_sys; ++i) c.gates.push_back(Gate::one(GateKind::H, i));
  for (int p = 0; p < p_blocks; ++p) {
    for (int i = 0; i < n_sys; ++i) c.gates.push_back(Gate::two(GateKind::Rzz, i, anc, slot++));
    for (int i = 0; i < n_sys + 1; ++i) c.gates.push_back(Gate::one(GateKind::Rx, i, slot++));
  }
  c.gates.push_back(Gate::su2(anc, slot, slot + 1, slot + 2));
  slot += 3;
  c.phi_slots = 3;
  c.n_params = slot;
  c.post_selection = PostSelection::bits({anc}, 0);
  c.validate();
  return c;
}

// SU(2)-symmetric ansatz: singlet pairs on (0,1),(2,3),...,(n_sys,n_sys+1)
// as the initial state, then P blocks of [Rswap(i, ancilla0) for each
// system wire i in order, Rswap on the ancilla pair]. Post-selection is
// the singlet on the ancilla pair (symmetric) or the |11> basis state
// (symmetry breaking).
inline CircuitIR build_su2_ansatz(int n_sys, int p_blocks, bool symmetric_sel) {
  if (n_sys < 2 || n_sys % 2 != 0)
    throw std::invalid_argument("build_su2_ansatz: system size must be even and >= 2");
  if (p_blocks < 1) throw std::invalid_argument("build_su2_ansatz: need at least 1 block");
  CircuitIR c;
  const int anc0 = n_sys, anc1 = n_sys + 1;
  c.n_qubits = n_sys + 2;
  for (int i = 0; i < n_sys; ++i) c.system_wires.push_back(i);
  c.ancilla_wires = {anc0, anc1};
  c.initial_state = InitialState::SingletPairs;
  int slot = 0;
  for (int p = 0; p < p_blocks; ++p) {
    for (int i = 0; i < n_sys; ++i)
      c.gates.push_back(Gate::two(GateKind::Rswap, i, anc0, slot++));
    c.gates.push_back(Gate::two(GateKind::Rswap, anc0, anc1, slot++));
  }
  c.n_params = slot;
  c.post_selection = symmetric_sel ? PostSelection::state({anc0, anc1}, singlet_state())
                                   : PostSelection::bits({anc0, anc1}, 3);
  c.validate();
  return c;
}

// Particle-number conserving ansatz: X gates prepare the Hartree-Fock
// state, then P blocks built from Rswap/Rzz/Rz only. Layer order inside a
// block is Rswap ladder, Rzz ladder, Rz on all wires (read from the
// figure; the orderings are interchangeable for expressiveness).
// With an ancilla the Rswap layer couples all-to-one instead, V(phi) is a
// single Rz on the ancilla, and the ancilla is post-selected in |0>.
inline CircuitIR build_u1_ansatz(int n_sys, int p_blocks, int electrons, bool with_ancilla) {
  if (n_sys < 2) throw std::invalid_argument("build_u1_ansatz: need at least 2 system wires");
  if (p_blocks < 1) throw std::invalid_argument("build_u1_ansatz: need at least 1 block");
  if (electrons <= 0 || electrons > n_sys)
    throw std::invalid_argument("build_u1_ansatz: electron count out of range");
  CircuitIR c;
  const int anc = n_sys;
  c.n_qubits = with_ancilla ? n_sys + 1 : n_sys;
  for (int i = 0; i < n_sys; ++i) c.system_wires.push_back(i);
  if (with_ancilla) c.ancilla_wires.push_back(anc);
  int slot = 0;
  for (int i = 0; i < electrons; ++i) c.gates.push_back(Gate::one(GateKind::X, i));
  for (int p = 0; p < p_blocks; ++p) {
    if (with_ancilla) {
      for (int i = 0; i < n_sys; ++i)
        c.gates.push_back(Gate::two(GateKind::Rswap, i, anc, slot++));
    } else {
      for (int i = 0; i < n_sys; ++i)
        c.gates.push_back(Gate::two(GateKind::Rswap, i, (i + 1) % n_sys, slot++));
    }
    for (int i = 0; i < n_sys; ++i)
      c.gates.push_back(Gate::two(GateKind::Rzz, i, (i + 1) % n_sys, slot++));
    for (int i = 0; i < c.n_qubits; ++i) c.gates.push_back(Gate::one(GateKind::Rz, i, slot++));
  }
  if (with_ancilla) {
    c.gates.push_back(Gate::one(GateKind::Rz, anc, slot++));
    c.phi_slots = 1;
    c.post_selection = PostSelection::bits({anc}, 0);
  }
  c.n_params = slot;
  c.validate();
  return c;
}

// Thermal ansatz: system and ancilla registers of equal size, ancillas on
// the odd wires, gate layout identical to build_hea on 2*n_sys wires.
// Nothing is post-selected; ancilla outcomes get reweighted downstream.
inline CircuitIR build_thermal_ansatz(int n_sys, int p_blocks, bool extra_ry = false) {
  if (n_sys < 2) throw std::invalid_argument("build_thermal_ansatz: need at least 2 system wires");
  CircuitIR c = build_hea(2 * n_sys, p_blocks, extra_ry);
  c.system_wires.clear();
  c.ancilla_wires.clear();
  for (int i = 0; i < 2 * n_sys; ++i)
    (i % 2 == 0 ? c.system_wires : c.ancilla_wires).push_back(i);
  c.validate();
  return c;
}

}  // namespace vps
