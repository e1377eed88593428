#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "vps/autodiff.hpp"
#include "vps/circuit.hpp"
#include "vps/neural.hpp"
#include "vps/thermal.hpp"

namespace vps {

enum class ObjectiveKind { Energy, Obj1, Obj2, Renyi2, TruncatedGibbs, GibbsExact };

inline const char* objective_kind_name(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::Energy: return "energy";
    case ObjectiveKind::Obj1: return "obj1";
    case ObjectiveKind::Obj2: return "obj2";
    case ObjectiveKind::Renyi2: return "renyi2";
    case ObjectiveKind::TruncatedGibbs: return "truncated_gibbs";
    case ObjectiveKind::GibbsExact: return "gibbs_exact";
  }
  return "?";
}

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::Energy;
  double beta = 0.0;    // thermal kinds
  double lambda = 0.0;  // obj1/obj2 penalty weight
  double p0 = 0.78;     // obj2 sigmoid offset

  bool is_thermal() const {
    return kind == ObjectiveKind::Renyi2 || kind == ObjectiveKind::TruncatedGibbs ||
           kind == ObjectiveKind::GibbsExact;
  }

  void validate() const {
    if (is_thermal() && beta <= 0.0)
      throw std::invalid_argument("thermal objectives require beta > 0");
    if ((kind == ObjectiveKind::Obj1 || kind == ObjectiveKind::Obj2) && lambda < 0.0)
      throw std::invalid_argument("penalty objectives require lambda >= 0");
    if (kind == ObjectiveKind::Obj2 && (p0 <= 0.0 || p0 >= 1.0))
      throw std::invalid_argument("obj2 requires p0 in (0,1)");
  }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double obj1(double value, double success_prob, double lambda) {
  return value - lambda * success_prob;
}

inline double obj2(double value, double success_prob, double lambda, double p0) {
  return value - lambda * sigmoid(success_prob - p0);
}

// Tr(H rho) + ln(Tr rho^2)/beta, the alpha=2 Renyi free energy.
inline double renyi2_free_energy(const DensityMatrix& rho, const PauliSum& h, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("renyi2_free_energy: beta must be positive");
  double p = purity(rho);
  if (p <= 0.0) throw SimError("renyi2_free_energy: non-positive purity");
  return density_matrix_expectation(rho, h) + std::log(p) / beta;
}

// Second-order series of the entropy around the identity:
// S2 = (1 - Tr rho^2) + (1 - 2 Tr rho^2 + Tr rho^3)/2.
inline double truncated_entropy(const DensityMatrix& rho) {
  const std::size_t n = rho.dim();
  double t2 = purity(rho);
  auto sq = detail::matmul(rho.mat, rho.mat, n);
  double t3 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) t3 += (sq[i * n + k] * rho.at(k, i)).real();
  return (1.0 - t2) + 0.5 * (1.0 - 2.0 * t2 + t3);
}

inline double truncated_gibbs_free_energy(const DensityMatrix& rho, const PauliSum& h,
                                          double beta) {
  if (beta <= 0.0) throw std::invalid_argument("truncated_gibbs: beta must be positive");
  return density_matrix_expectation(rho, h) - truncated_entropy(rho) / beta;
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  auto dec = eigh(rho.mat, rho.dim(), false);
  double s = 0.0;
  for (double lam : dec.eigenvalues) {
    if (lam < -1e-8)
      throw SimError("von_neumann_entropy: eigenvalue " + std::to_string(lam) +
                     " below the PSD floor");
    if (lam > 0.0) s -= lam * std::log(lam);
  }
  return s;
}

inline double gibbs_free_energy_exact(const DensityMatrix& rho, const PauliSum& h, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("gibbs_free_energy: beta must be positive");
  return density_matrix_expectation(rho, h) - von_neumann_entropy(rho) / beta;
}

namespace detail {

// Unnormalized projection onto the post-selection target, on the full
// register (the wires stay in place; failed branches are zeroed).
inline StateVector apply_post_projection(const StateVector& psi, const PostSelection& sel) {
  StateVector out = psi;
  if (sel.wires.empty()) return out;
  auto sel_table = scatter_table(sel.wires, psi.n_qubits);
  std::uint64_t all_mask = 0;
  for (int w : sel.wires) all_mask |= bitmask_of(w, psi.n_qubits);
  if (std::holds_alternative<std::uint64_t>(sel.target)) {
    const std::uint64_t anchor = sel_table[std::get<std::uint64_t>(sel.target)];
    for (std::uint64_t b = 0; b < psi.dim(); ++b)
      if ((b & all_mask) != anchor) out.amps[b] = cx{0, 0};
  } else {
    const auto& target = std::get<std::vector<cx>>(sel.target);
    auto keep = complement_wires(sel.wires, psi.n_qubits);
    auto keep_table = scatter_table(keep, psi.n_qubits);
    std::fill(out.amps.begin(), out.amps.end(), cx{0, 0});
    for (std::uint64_t r = 0; r < keep_table.size(); ++r) {
      cx overlap{0, 0};
      for (std::uint64_t j = 0; j < target.size(); ++j)
        overlap += std::conj(target[j]) * psi.amps[keep_table[r] | sel_table[j]];
      if (overlap == cx{0, 0}) continue;
      for (std::uint64_t j = 0; j < target.size(); ++j)
        out.amps[keep_table[r] | sel_table[j]] = target[j] * overlap;
    }
  }
  return out;
}

}  // namespace detail

// Post-selected energy through the reduced-state path; the objectives below
// compute the same number through full-register quadratic forms.
inline std::pair<double, double> energy_post_selected(const CircuitIR& circuit,
                                                      std::span<const double> params,
                                                      const PauliSum& h) {
  if (!circuit.post_selection)
    throw std::invalid_argument("energy_post_selected needs a post-selecting circuit");
  StateVector psi = simulate(circuit, params);
  auto [reduced, prob] = post_select(psi, *circuit.post_selection);
  return {expectation(reduced, h), prob};
}

// Ground-state objectives: plain energy, or post-selected energy with the
// optional overhead penalties of Obj1/Obj2.
class VqeObjective final : public Objective {
 public:
  VqeObjective(CircuitIR circuit, PauliSum h, ObjectiveSpec spec, bool use_post_selection = true)
      : circuit_(std::move(circuit)), spec_(spec), use_post_selection_(use_post_selection) {
    spec_.validate();
    if (spec_.is_thermal()) throw std::invalid_argument("VqeObjective: thermal kind");
    if (h.n_qubits != static_cast<int>(circuit_.system_wires.size()))
      throw std::invalid_argument("hamiltonian must live on the system register");
    h_embedded_ = h.embed(circuit_.system_wires, circuit_.n_qubits);
    if (spec_.kind != ObjectiveKind::Energy && !circuit_.post_selection)
      throw std::invalid_argument("penalty objectives need a post-selecting circuit");
    if (!circuit_.post_selection) use_post_selection_ = false;
  }

  ParamLayout layout() const override {
    return ParamLayout{circuit_.n_params, circuit_.phi_slots, 0};
  }

  ObjectiveEval eval(std::span<const double> params, std::span<double> grad) const override {
    StateVector psi = simulate(circuit_, params);
    ObjectiveEval out;
    if (!use_post_selection_) {
      StateVector hpsi = psi;
      hpsi.amps = pauli_sum_apply(h_embedded_, psi);
      double e = detail::re_inner(psi, hpsi);
      out.value = e;
      if (!grad.empty()) backprop_circuit(circuit_, params, psi, hpsi, grad);
      return out;
    }
    const PostSelection& sel = *circuit_.post_selection;
    StateVector projected = detail::apply_post_projection(psi, sel);
    const double omega = projected.norm_sq();
    if (omega < 1e-10)
      throw DegenerateProjectionError("post-selection weight " + std::to_string(omega) +
                                      " too small to renormalize through");
    StateVector h_proj = projected;
    h_proj.amps = pauli_sum_apply(h_embedded_, projected);
    const double numerator = detail::re_inner(projected, h_proj);
    const double energy = numerator / omega;
    out.success_prob = omega;

    double g_energy = 1.0, g_omega = 0.0;
    switch (spec_.kind) {
      case ObjectiveKind::Energy: out.value = energy; break;
      case ObjectiveKind::Obj1:
        out.value = obj1(energy, omega, spec_.lambda);
        g_omega = -spec_.lambda;
        break;
      case ObjectiveKind::Obj2: {
        out.value = obj2(energy, omega, spec_.lambda, spec_.p0);
        double s = sigmoid(omega - spec_.p0);
        g_omega = -spec_.lambda * s * (1.0 - s);
        break;
      }
      default: break;
    }
    if (!grad.empty()) {
      // dL/d(psi*) = gE (H P psi - E_k P psi)/omega + gw P psi
      StateVector seed(circuit_.n_qubits);
      for (std::uint64_t b = 0; b < psi.dim(); ++b)
        seed.amps[b] = g_energy * (h_proj.amps[b] - energy * projected.amps[b]) / omega +
                       g_omega * projected.amps[b];
      backprop_circuit(circuit_, params, psi, seed, grad);
    }
    return out;
  }

  const CircuitIR& circuit() const { return circuit_; }
  const ObjectiveSpec& spec() const { return spec_; }

 private:
  CircuitIR circuit_;
  ObjectiveSpec spec_;
  PauliSum h_embedded_;
  bool use_post_selection_ = true;
};

// Mixed-state objectives on the reweighted thermal ansatz. The neural
// weights occupy the trailing parameter group; pass nullopt to pin
// f = const (the plain variational baseline).
class ThermalObjective final : public Objective {
 public:
  ThermalObjective(CircuitIR circuit, PauliSum h, ObjectiveSpec spec,
                   std::optional<Reweighter> reweighter)
      : circuit_(std::move(circuit)),
        h_(std::move(h)),
        spec_(spec),
        reweighter_(std::move(reweighter)) {
    spec_.validate();
    if (!spec_.is_thermal()) throw std::invalid_argument("ThermalObjective: non-thermal kind");
    if (circuit_.post_selection)
      throw std::invalid_argument("thermal ansatz must not post-select");
    if (circuit_.ancilla_wires.empty())
      throw std::invalid_argument("thermal ansatz needs ancilla wires");
    if (h_.n_qubits != static_cast<int>(circuit_.system_wires.size()))
      throw std::invalid_argument("hamiltonian must live on the system register");
    if (reweighter_ && reweighter_->n_bits() != static_cast<int>(circuit_.ancilla_wires.size()))
      throw std::invalid_argument("reweighter input size must match ancilla count");
    h_dense_ = dense_matrix(h_, 12);
    sys_table_ = detail::scatter_table(circuit_.system_wires, circuit_.n_qubits);
    anc_table_ = detail::scatter_table(circuit_.ancilla_wires, circuit_.n_qubits);
  }

  ParamLayout layout() const override {
    int n_neural = reweighter_ ? static_cast<int>(reweighter_->weight_count()) : 0;
    return ParamLayout{circuit_.n_params, circuit_.phi_slots, n_neural};
  }

  ObjectiveEval eval(std::span<const double> params, std::span<double> grad) const override {
    const ParamLayout lay = layout();
    if (static_cast<int>(params.size()) != lay.total())
      throw std::invalid_argument("parameter vector has the wrong length");
    auto circuit_params = params.subspan(0, static_cast<std::size_t>(lay.n_circuit));
    auto neural_params = params.subspan(static_cast<std::size_t>(lay.n_circuit));

    StateVector psi = simulate(circuit_, circuit_params);
    std::optional<ReweighterTape> tape;
    std::vector<double> f;
    if (reweighter_) {
      tape = reweight_forward(*reweighter_, neural_params);
      f = tape->f;
    } else {
      f.assign(anc_table_.size(), 1.0 / static_cast<double>(anc_table_.size()));
    }

    // gather branch columns and the unnormalized mixture
    const std::size_t sd = sys_table_.size();
    const std::size_t ad = anc_table_.size();
    std::vector<cx> branches(ad * sd);
    for (std::size_t m = 0; m < ad; ++m)
      for (std::size_t i = 0; i < sd; ++i)
        branches[m * sd + i] = psi.amps[sys_table_[i] | anc_table_[m]];
    std::vector<cx> rho_u(sd * sd, cx{0, 0});
    for (std::size_t m = 0; m < ad; ++m) {
      const cx* col = &branches[m * sd];
      for (std::size_t i = 0; i < sd; ++i) {
        if (col[i] == cx{0, 0} || f[m] == 0.0) continue;
        const cx lhs = f[m] * col[i];
        for (std::size_t j = 0; j < sd; ++j) rho_u[i * sd + j] += lhs * std::conj(col[j]);
      }
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < sd; ++i) trace += rho_u[i * sd + i].real();
    if (trace <= 0.0) throw SimError("assembled state has non-positive trace");
    DensityMatrix rho(h_.n_qubits);
    for (std::size_t k = 0; k < sd * sd; ++k) rho.mat[k] = rho_u[k] / trace;

    ObjectiveEval out;
    std::vector<cx> gamma;  // gamma_ij = dF / d rho_ij (Wirtinger)
    out.value = functional_value(rho, grad.empty() ? nullptr : &gamma);
    if (grad.empty()) return out;

    // fold the trace normalization: dF/d rho_u = (gamma - c I)/trace
    cx c_acc{0, 0};
    for (std::size_t i = 0; i < sd; ++i)
      for (std::size_t j = 0; j < sd; ++j) c_acc += gamma[i * sd + j] * rho.at(i, j);
    const double c = c_acc.real();
    for (std::size_t i = 0; i < sd; ++i)
      for (std::size_t j = 0; j < sd; ++j) {
        gamma[i * sd + j] /= trace;
        if (i == j) gamma[i * sd + j] -= c / trace;
      }

    // seeds: dL/d psi*_(j,m) = f_m sum_i gamma_ij psi_(i,m); dL/df_m =
    // Re sum_ij gamma_ij psi_(i,m) psi*_(j,m)
    StateVector seed(circuit_.n_qubits);
    std::fill(seed.amps.begin(), seed.amps.end(), cx{0, 0});
    std::vector<double> df(ad, 0.0);
    std::vector<cx> y(sd);
    for (std::size_t m = 0; m < ad; ++m) {
      const cx* col = &branches[m * sd];
      for (std::size_t j = 0; j < sd; ++j) {
        cx acc{0, 0};
        for (std::size_t i = 0; i < sd; ++i) acc += gamma[i * sd + j] * col[i];
        y[j] = acc;
      }
      cx dfm{0, 0};
      for (std::size_t j = 0; j < sd; ++j) {
        seed.amps[sys_table_[j] | anc_table_[m]] = f[m] * y[j];
        dfm += y[j] * std::conj(col[j]);
      }
      df[m] = dfm.real();
    }
    backprop_circuit(circuit_, circuit_params, psi, seed,
                     grad.subspan(0, static_cast<std::size_t>(lay.n_circuit)));
    if (reweighter_)
      reweight_backward(*tape, df, grad.subspan(static_cast<std::size_t>(lay.n_circuit)));
    return out;
  }

  DensityMatrix assemble(std::span<const double> params) const {
    const ParamLayout lay = layout();
    auto circuit_params = params.subspan(0, static_cast<std::size_t>(lay.n_circuit));
    StateVector psi = simulate(circuit_, circuit_params);
    std::vector<double> f;
    if (reweighter_) {
      f = reweight_all(*reweighter_, params.subspan(static_cast<std::size_t>(lay.n_circuit)));
    } else {
      f.assign(anc_table_.size(), 1.0 / static_cast<double>(anc_table_.size()));
    }
    return detail::weighted_mixture(psi, circuit_.system_wires, circuit_.ancilla_wires, f);
  }

  const CircuitIR& circuit() const { return circuit_; }
  const PauliSum& hamiltonian() const { return h_; }
  const ObjectiveSpec& spec() const { return spec_; }
  const std::optional<Reweighter>& reweighter() const { return reweighter_; }

 private:
  // value and (optionally) gamma_ij = dF/d rho_ij for the normalized state
  double functional_value(const DensityMatrix& rho, std::vector<cx>* gamma) const {
    const std::size_t n = rho.dim();
    const double beta = spec_.beta;
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) energy += (h_dense_[i * n + j] * rho.at(j, i)).real();
    if (gamma) {
      gamma->assign(n * n, cx{0, 0});
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) (*gamma)[i * n + j] = h_dense_[j * n + i];
    }
    switch (spec_.kind) {
      case ObjectiveKind::Renyi2: {
        double t2 = purity(rho);
        if (t2 <= 0.0) throw SimError("renyi2: non-positive purity");
        if (gamma)
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
              (*gamma)[i * n + j] += (2.0 / (beta * t2)) * rho.at(j, i);
        return energy + std::log(t2) / beta;
      }
      case ObjectiveKind::TruncatedGibbs: {
        double t2 = purity(rho);
        auto sq = detail::matmul(rho.mat, rho.mat, n);
        double t3 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t k = 0; k < n; ++k) t3 += (sq[i * n + k] * rho.at(k, i)).real();
        double s2 = (1.0 - t2) + 0.5 * (1.0 - 2.0 * t2 + t3);
        if (gamma)
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
              (*gamma)[i * n + j] +=
                  (4.0 * rho.at(j, i) - 1.5 * sq[j * n + i]) / beta;
        return energy - s2 / beta;
      }
      case ObjectiveKind::GibbsExact: {
        auto dec = eigh(rho.mat, n, true);
        double s = 0.0;
        for (double lam : dec.eigenvalues)
          if (lam > 0.0) s -= lam * std::log(lam);
        if (gamma) {
          // d(-S)/d rho = ln rho + I, eigenvalues floored for the log
          constexpr double floor = 1e-12;
          for (std::size_t k = 0; k < n; ++k) {
            double lnl = std::log(std::max(dec.eigenvalues[k], floor)) + 1.0;
            for (std::size_t i = 0; i < n; ++i) {
              cx lhs = (lnl / beta) * std::conj(dec.vector_entry(i, k));
              for (std::size_t j = 0; j < n; ++j)
                (*gamma)[i * n + j] += lhs * dec.vector_entry(j, k);
            }
          }
        }
        return energy - s / beta;
      }
      default: throw std::invalid_argument("not a thermal kind");
    }
  }

  CircuitIR circuit_;
  PauliSum h_;
  ObjectiveSpec spec_;
  std::optional<Reweighter> reweighter_;
  std::vector<cx> h_dense_;
  std::vector<std::uint64_t> sys_table_;
  std::vector<std::uint64_t> anc_table_;
};

// Gibbs free energy of the neural pre-processing scheme: branch energies
// weighted by the classical model, entropy taken classically.
class PreprocessingObjective final : public Objective {
 public:
  PreprocessingObjective(CircuitIR circuit, PauliSum h, double beta, Reweighter model)
      : circuit_(std::move(circuit)), h_(std::move(h)), beta_(beta), model_(std::move(model)) {
    if (beta_ <= 0.0) throw std::invalid_argument("preprocessing objective: beta must be positive");
    if (!circuit_.ancilla_wires.empty())
      throw std::invalid_argument("preprocessing scheme uses no ancillas");
    if (model_.n_bits() != circuit_.n_qubits)
      throw std::invalid_argument("classical model must cover the register");
    if (h_.n_qubits != circuit_.n_qubits)
      throw std::invalid_argument("hamiltonian must match the register");
    h_embedded_ = h_;
  }

  ParamLayout layout() const override {
    return ParamLayout{circuit_.n_params, circuit_.phi_slots,
                       static_cast<int>(model_.weight_count())};
  }

  ObjectiveEval eval(std::span<const double> params, std::span<double> grad) const override {
    const ParamLayout lay = layout();
    if (static_cast<int>(params.size()) != lay.total())
      throw std::invalid_argument("parameter vector has the wrong length");
    auto circuit_params = params.subspan(0, static_cast<std::size_t>(lay.n_circuit));
    auto model_params = params.subspan(static_cast<std::size_t>(lay.n_circuit));
    auto tape = reweight_forward(model_, model_params);
    const auto& probs = tape.f;
    const std::uint64_t dim = std::uint64_t{1} << circuit_.n_qubits;

    double energy = 0.0;
    std::vector<double> branch_energy(dim, 0.0);
    std::vector<double> df(dim, 0.0);
    for (std::uint64_t s = 0; s < dim; ++s) {
      StateVector in(circuit_.n_qubits);
      in.amps[0] = cx{0, 0};
      in.amps[s] = cx{1, 0};
      for (const Gate& g : circuit_.gates) apply_gate(in, g, circuit_params);
      StateVector hpsi = in;
      hpsi.amps = pauli_sum_apply(h_embedded_, in);
      branch_energy[s] = detail::re_inner(in, hpsi);
      energy += probs[s] * branch_energy[s];
      if (!grad.empty() && probs[s] > 0.0) {
        StateVector seed = hpsi;
        for (cx& a : seed.amps) a *= probs[s];
        backprop_circuit(circuit_, circuit_params, in, seed,
                         grad.subspan(0, static_cast<std::size_t>(lay.n_circuit)));
      }
    }
    double entropy = classical_entropy(probs);
    ObjectiveEval out;
    out.value = energy - entropy / beta_;
    if (!grad.empty()) {
      for (std::uint64_t s = 0; s < dim; ++s)
        df[s] = branch_energy[s] + (std::log(std::max(probs[s], 1e-300)) + 1.0) / beta_;
      reweight_backward(tape, df, grad.subspan(static_cast<std::size_t>(lay.n_circuit)));
    }
    return out;
  }

  // rho and exact Gibbs free energy at the given parameters
  std::pair<DensityMatrix, double> assemble(std::span<const double> params) const {
    const ParamLayout lay = layout();
    Reweighter model = model_;
    auto model_params = params.subspan(static_cast<std::size_t>(lay.n_circuit));
    model.weights.assign(model_params.begin(), model_params.end());
    return preprocessing_baseline(circuit_, params.subspan(0, static_cast<std::size_t>(lay.n_circuit)),
                                  model, h_, beta_);
  }

  const CircuitIR& circuit() const { return circuit_; }

 private:
  CircuitIR circuit_;
  PauliSum h_;
  double beta_;
  Reweighter model_;
  PauliSum h_embedded_;
};

}  // namespace vps
