#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "vps/config.hpp"
#include "vps/objectives.hpp"
#include "vps/optimize.hpp"
#include "vps/thermal.hpp"
#include "vps/version.hpp"

namespace vps {

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimError("cannot write " + path.string());
  out << text;
}

inline nlohmann::json trial_to_json(const TrialResult& t, int index) {
  nlohmann::json j;
  j["trial"] = index;
  j["ok"] = t.ok;
  j["seed"] = t.seed;
  if (!t.ok) {
    j["error"] = t.error;
    return j;
  }
  j["best_value"] = t.best_value;
  j["steps"] = t.steps;
  j["wall_seconds"] = t.wall_seconds;
  j["history"] = t.history;
  if (!t.success_prob_history.empty()) {
    j["success_prob_history"] = t.success_prob_history;
    j["success_prob_final"] = t.success_prob_final;
  }
  j["params_best"] = t.param_snapshot;
  nlohmann::json cps = nlohmann::json::object();
  for (const auto& [step, params] : t.checkpoints) cps[std::to_string(step)] = params;
  j["checkpoints"] = cps;
  return j;
}

inline std::string summary_csv(const std::vector<TrialResult>& trials) {
  std::string csv = "trial,best_value,steps,success_prob_final,wall_time\n";
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const TrialResult& t = trials[k];
    csv += std::to_string(k) + ",";
    csv += (t.ok ? fmt_num(t.best_value) : "nan") + std::string{","};
    csv += std::to_string(t.steps) + ",";
    csv += (std::isnan(t.success_prob_final) ? "nan" : fmt_num(t.success_prob_final)) + std::string{","};
    csv += fmt_num(t.wall_seconds) + "\n";
  }
  return csv;
}

// best-trial parameters at the early-stop checkpoint (fall back to the
// final parameters when the trial converged before that step)
inline const std::vector<double>& checkpoint_params(const TrialResult& t, int early_stop_steps) {
  auto it = t.checkpoints.find(early_stop_steps);
  if (it != t.checkpoints.end()) return it->second;
  return t.checkpoints.rbegin()->second;
}

inline const std::vector<double>& final_params(const TrialResult& t) {
  return t.checkpoints.rbegin()->second;
}

}  // namespace detail

inline std::unique_ptr<Objective> make_objective(const ExperimentConfig& cfg, const PauliSum& h,
                                                 const CircuitIR& circuit, double beta) {
  ObjectiveSpec spec = cfg.objective;
  spec.beta = beta;
  if (cfg.lambda_is_default &&
      (spec.kind == ObjectiveKind::Obj1 || spec.kind == ObjectiveKind::Obj2))
    spec.lambda = 0.1 * h.norm1();
  if (!spec.is_thermal())
    return std::make_unique<VqeObjective>(circuit, h, spec, cfg.ansatz.use_post_selection);
  if (cfg.scheme == GibbsScheme::Preprocessing) {
    Reweighter model(circuit.n_qubits, cfg.reweighter_hidden, false);
    return std::make_unique<PreprocessingObjective>(circuit, h, beta, std::move(model));
  }
  std::optional<Reweighter> r;
  if (cfg.scheme != GibbsScheme::Uniform)
    r = Reweighter(static_cast<int>(circuit.ancilla_wires.size()), cfg.reweighter_hidden,
                   cfg.scheme == GibbsScheme::Bounded);
  return std::make_unique<ThermalObjective>(circuit, h, spec, std::move(r));
}

inline void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  nlohmann::json m;
  m["version"] = kVersion;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.canonical_text())));
  m["config_hash"] = hash;
  m["master_seed"] = cfg.optimizer.seed;
  m["task"] = cfg.task == Task::Vqe ? "vqe" : cfg.task == Task::Gibbs ? "gibbs" : "bench";
  detail::write_text_file(dir / "manifest.json", m.dump(2) + "\n");
  detail::write_text_file(dir / "config_canonical.cfg", cfg.canonical_text());
}

// VQE campaign: runs trials, writes summary/trial records, and the exact
// diagonalization baseline when the register is small enough.
inline int run_vqe_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  PauliSum h = cfg.hamiltonian.build();
  CircuitIR circuit = cfg.ansatz.build();
  if (h.n_qubits != static_cast<int>(circuit.system_wires.size()))
    throw ConfigError("ansatz.n", "system register (" +
                                      std::to_string(circuit.system_wires.size()) +
                                      ") does not match the hamiltonian (" +
                                      std::to_string(h.n_qubits) + " qubits)");
  auto objective = make_objective(cfg, h, circuit, 0.0);
  log << "vqe: " << circuit.n_qubits << " wires, " << circuit.n_params << " parameters, "
      << cfg.optimizer.trials << " trials\n";
  auto campaign = run_campaign(*objective, cfg.optimizer);

  fs::path dir(cfg.output_dir);
  fs::create_directories(dir / "trials");
  write_manifest(cfg, dir);
  detail::write_text_file(dir / "summary.csv", detail::summary_csv(campaign.trials));
  detail::write_text_file(dir / "circuit.txt", circuit_to_text(circuit));
  for (std::size_t k = 0; k < campaign.trials.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "trial_%03zu.json", k);
    detail::write_text_file(dir / "trials" / name,
                            detail::trial_to_json(campaign.trials[k], static_cast<int>(k)).dump(2) +
                                "\n");
  }

  nlohmann::json summary;
  summary["best_value"] = campaign.best_value;
  summary["best_trial"] = campaign.best_trial;
  summary["percentile_25_best"] = campaign.percentile_25_best;
  summary["p"] = cfg.ansatz.p;
  summary["n_params"] = circuit.n_params;
  if (h.n_qubits <= 12) {
    double exact = ground_energy(h);
    summary["exact_ground_energy"] = exact;
    summary["relative_error_best"] = std::abs(campaign.best_value - exact) / std::abs(exact);
    summary["relative_error_p25"] =
        std::abs(campaign.percentile_25_best - exact) / std::abs(exact);
  }
  const TrialResult& best = campaign.trials[static_cast<std::size_t>(campaign.best_trial)];
  if (!std::isnan(best.success_prob_final))
    summary["success_prob_best_trial"] = best.success_prob_final;
  detail::write_text_file(dir / "campaign.json", summary.dump(2) + "\n");
  log << "best " << campaign.best_value << " (trial " << campaign.best_trial << "), 25-percentile "
      << campaign.percentile_25_best << "\n";
  return 0;
}

// Thermal campaign over the beta grid: per-beta optimization, then density
// matrices, fidelities against both exact oracles, and correlation errors
// at the early-stop and converged checkpoints.
inline int run_gibbs_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  PauliSum h = cfg.hamiltonian.build();
  CircuitIR circuit = cfg.ansatz.build();
  const int n_sys = h.n_qubits;
  if (cfg.scheme == GibbsScheme::Preprocessing) {
    if (circuit.n_qubits != n_sys)
      throw ConfigError("ansatz.n", "preprocessing circuit must act on the system register");
  } else if (static_cast<int>(circuit.system_wires.size()) != n_sys) {
    throw ConfigError("ansatz.n", "system register does not match the hamiltonian");
  }
  if (!cfg.objective.is_thermal())
    throw ConfigError("objective.kind", "gibbs task needs a thermal objective");

  // correlation set: Z1Z2, X3 and the longest-range Z0Z pair available
  std::vector<std::pair<std::string, PauliSum>> observables;
  if (n_sys >= 3) {
    PauliSum o(n_sys);
    o.add_term(1.0, PauliString({{1, PauliAxis::Z}, {2, PauliAxis::Z}}, n_sys));
    observables.emplace_back("Z1Z2", o);
  }
  if (n_sys >= 4) {
    PauliSum o(n_sys);
    o.add_term(1.0, PauliString({{3, PauliAxis::X}}, n_sys));
    observables.emplace_back("X3", o);
  }
  {
    int far = std::min(n_sys - 1, 7);
    PauliSum o(n_sys);
    o.add_term(1.0, PauliString({{0, PauliAxis::Z}, {far, PauliAxis::Z}}, n_sys));
    observables.emplace_back("Z0Z" + std::to_string(far), o);
  }

  fs::path dir(cfg.output_dir);
  fs::create_directories(dir / "trials");
  write_manifest(cfg, dir);
  detail::write_text_file(dir / "circuit.txt", circuit_to_text(circuit));

  std::string metrics_csv =
      "beta,scheme,checkpoint,objective_value,fidelity_gibbs,fidelity_renyi,renyi2_free_energy,"
      "gibbs_free_energy";
  for (const auto& [name, obs] : observables) {
    (void)obs;
    metrics_csv += ",err_" + name;
  }
  metrics_csv += "\n";
  const char* scheme_name = cfg.scheme == GibbsScheme::Bounded     ? "bounded"
                            : cfg.scheme == GibbsScheme::Unbounded ? "unbounded"
                            : cfg.scheme == GibbsScheme::Uniform   ? "uniform"
                                                                   : "preprocessing";

  for (std::size_t bi = 0; bi < cfg.beta_grid.size(); ++bi) {
    const double beta = cfg.beta_grid[bi];
    auto objective = make_objective(cfg, h, circuit, beta);
    OptimizerConfig opt = cfg.optimizer;
    opt.seed = cfg.optimizer.seed + 100000 * bi;  // decorrelate beta campaigns, stay deterministic
    log << "gibbs: beta " << beta << ", scheme " << scheme_name << ", " << opt.trials
        << " trials\n";
    auto campaign = run_campaign(*objective, opt);
    const TrialResult& best = campaign.trials[static_cast<std::size_t>(campaign.best_trial)];

    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "beta%zu", bi);
    detail::write_text_file(dir / (std::string("summary_") + suffix + ".csv"),
                            detail::summary_csv(campaign.trials));
    for (std::size_t k = 0; k < campaign.trials.size(); ++k) {
      char name[48];
      std::snprintf(name, sizeof(name), "trial_%s_%03zu.json", suffix, k);
      detail::write_text_file(
          dir / "trials" / name,
          detail::trial_to_json(campaign.trials[k], static_cast<int>(k)).dump(2) + "\n");
    }

    auto gibbs = exact_gibbs(h, beta);
    auto renyi = exact_renyi2(h, beta);
    std::vector<double> exact_corr;
    for (const auto& [name, obs] : observables) {
      (void)name;
      exact_corr.push_back(density_matrix_expectation(gibbs, obs));
    }

    for (const auto& [label, params] :
         std::vector<std::pair<std::string, const std::vector<double>*>>{
             {"early", &detail::checkpoint_params(best, opt.early_stop_steps)},
             {"converged", &detail::final_params(best)}}) {
      DensityMatrix rho;
      if (cfg.scheme == GibbsScheme::Preprocessing) {
        auto* pre = dynamic_cast<PreprocessingObjective*>(objective.get());
        rho = pre->assemble(*params).first;
      } else {
        auto* thermal = dynamic_cast<ThermalObjective*>(objective.get());
        rho = thermal->assemble(*params);
      }
      save_density_matrix(rho, (dir / ("rho_" + std::string(suffix) + "_" + label + ".dm")).string());
      metrics_csv += detail::fmt_num(beta);
      metrics_csv += std::string(",") + scheme_name + "," + label;
      metrics_csv += "," + detail::fmt_num(objective->value(*params));
      metrics_csv += "," + detail::fmt_num(fidelity(rho, gibbs));
      metrics_csv += "," + detail::fmt_num(fidelity(rho, renyi.rho));
      metrics_csv += "," + detail::fmt_num(renyi2_free_energy(rho, h, beta));
      metrics_csv += "," + detail::fmt_num(gibbs_free_energy_exact(rho, h, beta));
      for (std::size_t ob = 0; ob < observables.size(); ++ob)
        metrics_csv += "," + detail::fmt_num(std::abs(
                                 density_matrix_expectation(rho, observables[ob].second) -
                                 exact_corr[ob]));
      metrics_csv += "\n";
    }
    log << "  best objective " << campaign.best_value << "\n";
  }
  detail::write_text_file(dir / "gibbs_metrics.csv", metrics_csv);
  return 0;
}

// Gate counts and wall-clock micro-benchmark of one ansatz.
inline int run_bench_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  CircuitIR circuit = cfg.ansatz.build();
  std::map<std::string, int> counts;
  int two_qubit = 0;
  for (const Gate& g : circuit.gates) {
    counts[gate_name(g.kind)] += 1;
    two_qubit += gate_wire_count(g.kind) == 2;
  }
  nlohmann::json j;
  j["builder"] = cfg.ansatz.builder;
  j["qubits"] = circuit.n_qubits;
  j["params"] = circuit.n_params;
  j["gates_total"] = circuit.gates.size();
  j["gates_two_qubit"] = two_qubit;
  j["gate_counts"] = counts;

  std::mt19937_64 rng(cfg.optimizer.seed);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> params(static_cast<std::size_t>(circuit.n_params));
  for (double& x : params) x = g(rng);
  auto t0 = std::chrono::steady_clock::now();
  StateVector psi = simulate(circuit, params);
  auto t1 = std::chrono::steady_clock::now();
  j["forward_seconds"] = std::chrono::duration<double>(t1 - t0).count();
  j["norm"] = psi.norm_sq();

  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_manifest(cfg, dir);
  detail::write_text_file(dir / "bench.json", j.dump(2) + "\n");
  detail::write_text_file(dir / "circuit.txt", circuit_to_text(circuit));
  log << j.dump(2) << "\n";
  return 0;
}

inline int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  switch (cfg.task) {
    case Task::Vqe: return run_vqe_experiment(cfg, log);
    case Task::Gibbs: return run_gibbs_experiment(cfg, log);
    case Task::Bench: return run_bench_experiment(cfg, log);
    case Task::Oracle:
      throw ConfigError("experiment.task", "oracle runs through `vps oracle`, not a config file");
  }
  return 1;
}

// Long-format (x, series, value) CSVs derived from campaign artifacts.
inline int emit_plot_data(const std::string& campaign_dir, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::path dir(campaign_dir);
  auto manifest_path = dir / "manifest.json";
  std::ifstream mf(manifest_path);
  if (!mf) throw SimError("missing artifact: " + manifest_path.string());
  nlohmann::json manifest;
  mf >> manifest;
  std::string task = manifest.value("task", "");

  if (task == "vqe") {
    auto campaign_path = dir / "campaign.json";
    std::ifstream cf(campaign_path);
    if (!cf) throw SimError("missing artifact: " + campaign_path.string());
    nlohmann::json c;
    cf >> c;
    std::string csv = "x,series,value\n";
    const double p = c.value("p", 0);
    csv += detail::fmt_num(p) + ",best_energy," + detail::fmt_num(c["best_value"].get<double>()) +
           "\n";
    csv += detail::fmt_num(p) + ",p25_energy," +
           detail::fmt_num(c["percentile_25_best"].get<double>()) + "\n";
    if (c.contains("exact_ground_energy")) {
      csv += detail::fmt_num(p) + ",exact_energy," +
             detail::fmt_num(c["exact_ground_energy"].get<double>()) + "\n";
      csv += detail::fmt_num(p) + ",best_relative_error," +
             detail::fmt_num(c["relative_error_best"].get<double>()) + "\n";
      csv += detail::fmt_num(p) + ",p25_relative_error," +
             detail::fmt_num(c["relative_error_p25"].get<double>()) + "\n";
    }
    detail::write_text_file(dir / "plot_energy.csv", csv);
    log << "wrote " << (dir / "plot_energy.csv").string() << "\n";
    return 0;
  }
  if (task == "gibbs") {
    auto metrics_path = dir / "gibbs_metrics.csv";
    std::ifstream gf(metrics_path);
    if (!gf) throw SimError("missing artifact: " + metrics_path.string());
    std::string header;
    std::getline(gf, header);
    std::vector<std::string> cols;
    {
      std::stringstream hs(header);
      std::string c;
      while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    std::string fid_csv = "x,series,value\n";
    std::string corr_csv = "x,series,value\n";
    std::string line;
    while (std::getline(gf, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ls(line);
      std::string f;
      while (std::getline(ls, f, ',')) fields.push_back(f);
      std::string beta = fields[0], scheme = fields[1], checkpoint = fields[2];
      for (std::size_t k = 3; k < cols.size() && k < fields.size(); ++k) {
        std::string series = scheme + "/" + checkpoint + "/" + cols[k];
        std::string row = beta + "," + series + "," + fields[k] + "\n";
        if (cols[k].rfind("err_", 0) == 0)
          corr_csv += row;
        else
          fid_csv += row;
      }
    }
    detail::write_text_file(dir / "plot_fidelity.csv", fid_csv);
    detail::write_text_file(dir / "plot_correlation_error.csv", corr_csv);
    log << "wrote " << (dir / "plot_fidelity.csv").string() << " and "
        << (dir / "plot_correlation_error.csv").string() << "\n";
    return 0;
  }
  throw SimError("campaign at " + campaign_dir + " has no plottable artifacts (task '" + task +
                 "')");
}

}  // namespace vps
