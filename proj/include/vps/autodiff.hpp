#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "vps/circuit.hpp"
#include "vps/statevector.hpp"

namespace vps {

// Slot ranges of one flat parameter vector: circuit angles theta, the
// trailing ancilla-module angles phi inside them, then network weights.
struct ParamLayout {
  int n_circuit = 0;
  int n_phi = 0;     // trailing slots of the circuit group
  int n_neural = 0;

  int total() const { return n_circuit + n_neural; }
};

struct ObjectiveEval {
  double value = 0.0;
  double success_prob = std::numeric_limits<double>::quiet_NaN();
};

// A scalar loss over one flat parameter vector, with an exact gradient.
// Implementations must be pure: eval() may run concurrently on independent
// parameter vectors.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual ParamLayout layout() const = 0;
  virtual ObjectiveEval eval(std::span<const double> params, std::span<double> grad) const = 0;

  double value(std::span<const double> params) const { return eval(params, {}).value; }
};

inline std::vector<double> gradient(const Objective& objective, std::span<const double> params) {
  std::vector<double> grad(params.size(), 0.0);
  auto ev = objective.eval(params, grad);
  if (!std::isfinite(ev.value)) throw SimError("objective evaluated to a non-finite value");
  return grad;
}

// Central differences; the correctness oracle for every exact gradient.
inline std::vector<double> finite_difference(const std::function<double(std::span<const double>)>& fn,
                                             std::span<const double> params, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_difference: step must be positive");
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> grad(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double saved = p[k];
    p[k] = saved + step;
    double up = fn(p);
    p[k] = saved - step;
    double down = fn(p);
    p[k] = saved;
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

namespace detail {

// Applies the gate's generator (d/dtheta e^{i theta P} = i P e^{i theta P});
// out = i P |in>. Only parameterized kinds have generators.
inline void apply_generator(StateVector& psi, const Gate& g) {
  const int w0 = g.wires[0];
  switch (g.kind) {
    case GateKind::Rx: {
      // i X
      const std::uint64_t m = bitmask_of(w0, psi.n_qubits);
      for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        if (i & m) continue;
        cx a0 = psi.amps[i], a1 = psi.amps[i | m];
        psi.amps[i] = cx{0, 1} * a1;
        psi.amps[i | m] = cx{0, 1} * a0;
      }
      break;
    }
    case GateKind::Ry: {
      // i Y : |0> -> -|1>, |1> -> +|0> times ... iY = [[0,1],[-1,0]]
      const std::uint64_t m = bitmask_of(w0, psi.n_qubits);
      for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        if (i & m) continue;
        cx a0 = psi.amps[i], a1 = psi.amps[i | m];
        psi.amps[i] = a1;
        psi.amps[i | m] = -a0;
      }
      break;
    }
    case GateKind::Rz: {
      const std::uint64_t m = bitmask_of(w0, psi.n_qubits);
      for (std::uint64_t i = 0; i < psi.dim(); ++i)
        psi.amps[i] *= (i & m) ? cx{0, -1} : cx{0, 1};
      break;
    }
    case GateKind::Rzz: {
      const std::uint64_t m0 = bitmask_of(g.wires[0], psi.n_qubits);
      const std::uint64_t m1 = bitmask_of(g.wires[1], psi.n_qubits);
      for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        bool equal = ((i & m0) != 0) == ((i & m1) != 0);
        psi.amps[i] *= equal ? cx{0, 1} : cx{0, -1};
      }
      break;
    }
    case GateKind::Rswap: {
      const std::uint64_t m0 = bitmask_of(g.wires[0], psi.n_qubits);
      const std::uint64_t m1 = bitmask_of(g.wires[1], psi.n_qubits);
      for (std::uint64_t i = 0; i < psi.dim(); ++i) {
        bool b0 = (i & m0) != 0, b1 = (i & m1) != 0;
        if (b0 == b1) {
          psi.amps[i] *= cx{0, 1};
        } else if (b0 && !b1) {
          std::uint64_t j = (i ^ m0) | m1;
          cx a10 = psi.amps[i], a01 = psi.amps[j];
          psi.amps[i] = cx{0, 1} * a01;
          psi.amps[j] = cx{0, 1} * a10;
        }
      }
      break;
    }
    default: throw std::invalid_argument("gate kind has no generator");
  }
}

inline double re_inner(const StateVector& a, const StateVector& b) {
  double acc = 0.0;
  for (std::uint64_t i = 0; i < a.dim(); ++i)
    acc += a.amps[i].real() * b.amps[i].real() + a.amps[i].imag() * b.amps[i].imag();
  return acc;
}

// Elementary rotations a SU2 gate expands into, applied in list order.
inline std::vector<Gate> expand_su2(const Gate& g) {
  return {Gate::one(GateKind::Rz, g.wires[0], g.slots[0]),
          Gate::one(GateKind::Ry, g.wires[0], g.slots[1]),
          Gate::one(GateKind::Rz, g.wires[0], g.slots[2])};
}

}  // namespace detail

// Reverse sweep of the adjoint-state method. `final_state` is the circuit
// output, `seed` holds dL/d(psi*) at the output; gate unitaries are undone
// one by one and dL/dtheta_s = 2 Re <lambda| i P_s |psi_s> accumulates into
// grad (which must span the circuit slots). Returns dL/d(psi*) at the
// circuit input (rarely needed; the initial state is not parameterized).
inline void backprop_circuit(const CircuitIR& circuit, std::span<const double> params,
                             const StateVector& final_state, const StateVector& seed,
                             std::span<double> grad) {
  StateVector phi = final_state;   // walks backward through the forward states
  StateVector lambda = seed;       // adjoint state
  StateVector scratch(circuit.n_qubits);
  for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
    const Gate& g = *it;
    if (g.kind == GateKind::SU2) {
      auto parts = detail::expand_su2(g);
      for (auto pit = parts.rbegin(); pit != parts.rend(); ++pit) {
        scratch = phi;
        detail::apply_generator(scratch, *pit);
        grad[static_cast<std::size_t>(pit->slots[0])] += 2.0 * detail::re_inner(lambda, scratch);
        apply_gate_adjoint(phi, *pit, params);
        apply_gate_adjoint(lambda, *pit, params);
      }
      continue;
    }
    if (gate_slot_count(g.kind) == 1) {
      scratch = phi;
      detail::apply_generator(scratch, g);
      grad[static_cast<std::size_t>(g.slots[0])] += 2.0 * detail::re_inner(lambda, scratch);
    }
    apply_gate_adjoint(phi, g, params);
    apply_gate_adjoint(lambda, g, params);
  }
}

}  // namespace vps
