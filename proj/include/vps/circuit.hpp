#pragma once

#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vps/statevector.hpp"

namespace vps {

enum class InitialState { Zeros, SingletPairs };

// Ordered gate program plus the wire bookkeeping the objectives need.
// phi_slots counts the trailing slots that belong to the ancilla module
// V(phi); they are ordinary circuit parameters to the optimizer.
struct CircuitIR {
  int n_qubits = 0;
  std::vector<Gate> gates;
  int n_params = 0;
  std::vector<int> system_wires;
  std::vector<int> ancilla_wires;
  std::optional<PostSelection> post_selection;
  InitialState initial_state = InitialState::Zeros;
  int phi_slots = 0;

  void validate() const {
    std::set<int> covered;
    for (int w : system_wires) covered.insert(w);
    for (int w : ancilla_wires) covered.insert(w);
    if (static_cast<int>(covered.size()) != n_qubits ||
        static_cast<int>(system_wires.size() + ancilla_wires.size()) != n_qubits)
      throw std::invalid_argument("system/ancilla wires must partition the register");
    std::vector<bool> used(static_cast<std::size_t>(n_params), false);
    for (const Gate& g : gates) {
      for (int k = 0; k < gate_wire_count(g.kind); ++k)
        if (g.wires[k] < 0 || g.wires[k] >= n_qubits)
          throw std::invalid_argument("gate wire out of range");
      for (int k = 0; k < gate_slot_count(g.kind); ++k) {
        int s = g.slots[k];
        if (s < 0 || s >= n_params) throw std::invalid_argument("gate slot out of range");
        used[static_cast<std::size_t>(s)] = true;
      }
    }
    for (int s = 0; s < n_params; ++s)
      if (!used[static_cast<std::size_t>(s)])
        throw std::invalid_argument("parameter slot " + std::to_string(s) +
                                    " referenced by no gate");
  }
};

// |01> - |10> over sqrt(2), the J_tot^2 = 0 pair state.
inline std::vector<cx> singlet_state() {
  const double s = 1.0 / std::sqrt(2.0);
  return {cx{0, 0}, cx{s, 0}, cx{-s, 0}, cx{0, 0}};
}

inline StateVector initial_state_vector(const CircuitIR& c) {
  StateVector psi(c.n_qubits);
  if (c.initial_state == InitialState::SingletPairs) {
    if (c.n_qubits % 2 != 0)
      throw std::invalid_argument("singlet-pair initialization needs an even register");
    // product of singlets on (0,1),(2,3),...
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<cx> amps(psi.dim(), cx{0, 0});
    const int pairs = c.n_qubits / 2;
    for (std::uint64_t p = 0; p < (std::uint64_t{1} << pairs); ++p) {
      // bit k of p chooses |01> (0) or |10> (1) on pair k
      std::uint64_t idx = 0;
      double sign = 1.0;
      for (int k = 0; k < pairs; ++k) {
        int hi = 2 * k, lo = 2 * k + 1;
        bool flip = (p >> (pairs - 1 - k)) & 1u;
        idx |= bitmask_of(flip ? hi : lo, c.n_qubits);
        (void)hi;
        (void)lo;
        if (flip) sign = -sign;
      }
      double w = 1.0;
      for (int k = 0; k < pairs; ++k) w *= s;
      amps[idx] = cx{sign * w, 0};
    }
    psi.amps = std::move(amps);
  }
  return psi;
}

inline StateVector simulate(const CircuitIR& c, std::span<const double> params) {
  if (static_cast<int>(params.size()) < c.n_params)
    throw std::invalid_argument("parameter vector shorter than circuit n_params");
  StateVector psi = initial_state_vector(c);
  for (const Gate& g : c.gates) apply_gate(psi, g, params);
  return psi;
}

// Structured-text form for experiment logs. Append-only format:
//   qubits/system/ancilla/params/init header lines, one `gate` line per
//   gate (name, wires, `slots` indices), optional `postselect` line.
inline std::string circuit_to_text(const CircuitIR& c) {
  std::ostringstream out;
  out << "qubits " << c.n_qubits << "\n";
  auto wire_list = [&](const char* tag, const std::vector<int>& ws) {
    out << tag;
    for (int w : ws) out << ' ' << w;
    out << "\n";
  };
  wire_list("system", c.system_wires);
  wire_list("ancilla", c.ancilla_wires);
  out << "params " << c.n_params << "\n";
  out << "init " << (c.initial_state == InitialState::Zeros ? "zeros" : "singlet_pairs") << "\n";
  for (const Gate& g : c.gates) {
    out << "gate " << gate_name(g.kind);
    for (int k = 0; k < gate_wire_count(g.kind); ++k) out << ' ' << g.wires[k];
    if (gate_slot_count(g.kind) > 0) {
      out << " slots";
      for (int k = 0; k < gate_slot_count(g.kind); ++k) out << ' ' << g.slots[k];
    }
    out << "\n";
  }
  if (c.post_selection) {
    out << "postselect wires";
    for (int w : c.post_selection->wires) out << ' ' << w;
    if (std::holds_alternative<std::uint64_t>(c.post_selection->target)) {
      std::uint64_t bits = std::get<std::uint64_t>(c.post_selection->target);
      out << " bits " << index_to_bitstring(bits, static_cast<int>(c.post_selection->wires.size()));
    } else {
      out << " state";
      out.precision(17);
      for (const cx& a : std::get<std::vector<cx>>(c.post_selection->target))
        out << " (" << a.real() << "," << a.imag() << ")";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace vps
