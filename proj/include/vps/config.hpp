#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vps/ansatz.hpp"
#include "vps/objectives.hpp"
#include "vps/optimize.hpp"
#include "vps/pauli.hpp"

namespace vps {

enum class Task { Vqe, Gibbs, Oracle, Bench };
enum class GibbsScheme { Bounded, Unbounded, Uniform, Preprocessing };

struct HamiltonianSpec {
  std::string builder;  // tfim | heisenberg | file
  int rows = 1, cols = 2;
  bool periodic = true;
  bool one_dimensional = false;
  std::string file;

  PauliSum build() const {
    if (builder == "tfim") return build_tfim(rows, cols, periodic, one_dimensional);
    if (builder == "heisenberg") return build_heisenberg(rows, cols, periodic);
    if (builder == "file") {
      std::ifstream in(file);
      if (!in) throw ConfigError("hamiltonian.file", "cannot open '" + file + "'");
      return parse_pauli_file(in);
    }
    throw ConfigError("hamiltonian.builder", "unknown builder '" + builder + "'");
  }
};

struct AnsatzSpec {
  std::string builder;  // hea | hea_postselect | su2 | u1 | thermal
  int n = 2;
  int p = 1;
  bool extra_ry = false;
  bool symmetric = true;
  int electrons = 1;
  bool with_ancilla = true;
  bool use_post_selection = true;

  CircuitIR build() const {
    CircuitIR c;
    if (builder == "hea")
      c = build_hea(n, p, extra_ry);
    else if (builder == "hea_postselect")
      c = build_hea_postselect(n, p);
    else if (builder == "su2")
      c = build_su2_ansatz(n, p, symmetric);
    else if (builder == "u1")
      c = build_u1_ansatz(n, p, electrons, with_ancilla);
    else if (builder == "thermal")
      c = build_thermal_ansatz(n, p, extra_ry);
    else
      throw ConfigError("ansatz.builder", "unknown builder '" + builder + "'");
    if (!use_post_selection) c.post_selection.reset();
    return c;
  }
};

struct ExperimentConfig {
  Task task = Task::Vqe;
  std::string output_dir = "runs/out";
  HamiltonianSpec hamiltonian;
  AnsatzSpec ansatz;
  ObjectiveSpec objective;
  bool lambda_is_default = true;  // lambda = 0.1 * |H|_1 unless given
  OptimizerConfig optimizer;
  std::vector<double> beta_grid{1.0};
  GibbsScheme scheme = GibbsScheme::Bounded;
  std::vector<int> reweighter_hidden{32, 32};

  // text the manifest hash covers; canonical key order
  std::string canonical_text() const;

  void validate() const {
    if (task == Task::Gibbs && beta_grid.empty())
      throw ConfigError("gibbs.beta_grid", "must list at least one beta");
    for (double b : beta_grid)
      if (b <= 0.0) throw ConfigError("gibbs.beta_grid", "beta values must be positive");
    optimizer.validate();
  }
};

namespace detail {

using KvSections = std::map<std::string, std::map<std::string, std::string>>;

inline KvSections parse_ini(std::istream& in) {
  KvSections out;
  std::string line, section = "experiment";
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string t = strip(line);
    if (t.empty()) continue;
    if (t.front() == '[' && t.back() == ']') {
      section = strip(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    out[section][strip(t.substr(0, eq))] = strip(t.substr(eq + 1));
  }
  return out;
}

inline KvSections flatten_json(const nlohmann::json& j) {
  KvSections out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_object())
      throw ConfigError(it.key(), "top-level config entries must be sections");
    for (auto f = it.value().begin(); f != it.value().end(); ++f) {
      const auto& v = f.value();
      std::string s;
      if (v.is_string())
        s = v.get<std::string>();
      else if (v.is_boolean())
        s = v.get<bool>() ? "true" : "false";
      else if (v.is_array()) {
        std::ostringstream acc;
        for (std::size_t k = 0; k < v.size(); ++k) {
          if (k) acc << ",";
          acc << v[k].dump();
        }
        s = acc.str();
      } else
        s = v.dump();
      out[it.key()][f.key()] = s;
    }
  }
  return out;
}

struct KvReader {
  const KvSections& kv;
  mutable std::map<std::string, std::string> consumed;

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    auto s = kv.find(section);
    if (s == kv.end()) return std::nullopt;
    auto f = s->second.find(key);
    if (f == s->second.end()) return std::nullopt;
    consumed[section + "." + key] = f->second;
    return f->second;
  }
  std::string get_or(const std::string& sec, const std::string& key,
                     const std::string& dflt) const {
    return get(sec, key).value_or(dflt);
  }
  double num(const std::string& sec, const std::string& key, double dflt) const {
    auto v = get(sec, key);
    if (!v) return dflt;
    try {
      return std::stod(*v);
    } catch (const std::exception&) {
      throw ConfigError(sec + "." + key, "expected a number, got '" + *v + "'");
    }
  }
  int integer(const std::string& sec, const std::string& key, int dflt) const {
    auto v = get(sec, key);
    if (!v) return dflt;
    try {
      return std::stoi(*v);
    } catch (const std::exception&) {
      throw ConfigError(sec + "." + key, "expected an integer, got '" + *v + "'");
    }
  }
  bool flag(const std::string& sec, const std::string& key, bool dflt) const {
    auto v = get(sec, key);
    if (!v) return dflt;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(sec + "." + key, "expected a boolean, got '" + *v + "'");
  }
};

inline std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(field, "bad number '" + item + "'");
    }
  }
  return out;
}

inline std::vector<int> parse_int_list(const std::string& text, const std::string& field) {
  std::vector<int> out;
  for (double v : parse_number_list(text, field)) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::istream& in, bool json_format) {
  detail::KvSections kv;
  if (json_format) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& ex) {
      throw ConfigError("<json>", ex.what());
    }
    kv = detail::flatten_json(j);
  } else {
    kv = detail::parse_ini(in);
  }
  detail::KvReader r{kv, {}};
  ExperimentConfig cfg;

  std::string task = r.get_or("experiment", "task", "vqe");
  if (task == "vqe")
    cfg.task = Task::Vqe;
  else if (task == "gibbs")
    cfg.task = Task::Gibbs;
  else if (task == "oracle")
    cfg.task = Task::Oracle;
  else if (task == "bench")
    cfg.task = Task::Bench;
  else
    throw ConfigError("experiment.task", "unknown task '" + task + "'");
  cfg.output_dir = r.get_or("experiment", "output_dir", "runs/out");
  cfg.optimizer.seed = static_cast<std::uint64_t>(r.num("experiment", "seed", 42));

  cfg.hamiltonian.builder = r.get_or("hamiltonian", "builder", "tfim");
  cfg.hamiltonian.rows = r.integer("hamiltonian", "rows", 1);
  cfg.hamiltonian.cols = r.integer("hamiltonian", "cols", 2);
  cfg.hamiltonian.periodic = r.flag("hamiltonian", "periodic", true);
  cfg.hamiltonian.one_dimensional = r.flag("hamiltonian", "one_dimensional", false);
  cfg.hamiltonian.file = r.get_or("hamiltonian", "file", "");
  if (cfg.hamiltonian.builder == "file" && cfg.hamiltonian.file.empty())
    throw ConfigError("hamiltonian.file", "builder 'file' needs a path");

  cfg.ansatz.builder = r.get_or("ansatz", "builder", "hea");
  cfg.ansatz.n = r.integer("ansatz", "n", 2);
  cfg.ansatz.p = r.integer("ansatz", "p", 1);
  cfg.ansatz.extra_ry = r.flag("ansatz", "extra_ry", false);
  cfg.ansatz.symmetric = r.flag("ansatz", "symmetric", true);
  cfg.ansatz.electrons = r.integer("ansatz", "electrons", 1);
  cfg.ansatz.with_ancilla = r.flag("ansatz", "with_ancilla", true);
  cfg.ansatz.use_post_selection = r.flag("ansatz", "use_post_selection", true);

  std::string kind = r.get_or("objective", "kind", "energy");
  if (kind == "energy")
    cfg.objective.kind = ObjectiveKind::Energy;
  else if (kind == "obj1")
    cfg.objective.kind = ObjectiveKind::Obj1;
  else if (kind == "obj2")
    cfg.objective.kind = ObjectiveKind::Obj2;
  else if (kind == "renyi2")
    cfg.objective.kind = ObjectiveKind::Renyi2;
  else if (kind == "truncated_gibbs")
    cfg.objective.kind = ObjectiveKind::TruncatedGibbs;
  else if (kind == "gibbs_exact")
    cfg.objective.kind = ObjectiveKind::GibbsExact;
  else
    throw ConfigError("objective.kind", "unknown kind '" + kind + "'");
  auto lambda = r.get("objective", "lambda");
  if (lambda && *lambda != "default") {
    cfg.objective.lambda = std::stod(*lambda);
    cfg.lambda_is_default = false;
  }
  cfg.objective.p0 = r.num("objective", "p0", 0.78);
  cfg.objective.beta = r.num("objective", "beta", 0.0);

  cfg.optimizer.trials = r.integer("optimizer", "trials", 50);
  cfg.optimizer.max_steps = r.integer("optimizer", "max_steps", 3000);
  cfg.optimizer.early_stop_steps = r.integer("optimizer", "early_stop_steps", 300);
  cfg.optimizer.converge_eps = r.num("optimizer", "converge_eps", 1e-7);
  cfg.optimizer.converge_count = r.integer("optimizer", "converge_count", 100);
  cfg.optimizer.circuit_lr_base = r.num("optimizer", "circuit_lr_base", 0.08);
  cfg.optimizer.circuit_lr_halflife = r.num("optimizer", "circuit_lr_halflife", 1200);
  cfg.optimizer.neural_lr = r.num("optimizer", "neural_lr", 0.015);
  cfg.optimizer.circuit_init_sigma = r.num("optimizer", "circuit_init_sigma", 0.02);
  cfg.optimizer.neural_init_sigma = r.num("optimizer", "neural_init_sigma", 0.005);

  if (auto grid = r.get("gibbs", "beta_grid"))
    cfg.beta_grid = detail::parse_number_list(*grid, "gibbs.beta_grid");
  else if (cfg.objective.beta > 0.0)
    cfg.beta_grid = {cfg.objective.beta};
  std::string scheme = r.get_or("gibbs", "scheme", "bounded");
  if (scheme == "bounded")
    cfg.scheme = GibbsScheme::Bounded;
  else if (scheme == "unbounded")
    cfg.scheme = GibbsScheme::Unbounded;
  else if (scheme == "uniform")
    cfg.scheme = GibbsScheme::Uniform;
  else if (scheme == "preprocessing")
    cfg.scheme = GibbsScheme::Preprocessing;
  else
    throw ConfigError("gibbs.scheme", "unknown scheme '" + scheme + "'");
  if (auto hidden = r.get("gibbs", "reweighter_hidden"))
    cfg.reweighter_hidden = detail::parse_int_list(*hidden, "gibbs.reweighter_hidden");

  // unknown keys are config errors (catches typos early)
  for (const auto& [section, fields] : kv)
    for (const auto& [key, value] : fields) {
      (void)value;
      if (!r.consumed.count(section + "." + key))
        throw ConfigError(section + "." + key, "unknown configuration key");
    }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  bool json_format = path.size() > 5 && path.substr(path.size() - 5) == ".json";
  if (!json_format) {
    // sniff a leading '{'
    char c = 0;
    while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
    }
    json_format = (c == '{');
    in.clear();
    in.seekg(0);
  }
  return parse_experiment_config(in, json_format);
}

inline std::string ExperimentConfig::canonical_text() const {
  std::ostringstream out;
  out.precision(17);
  const char* task_name = task == Task::Vqe      ? "vqe"
                          : task == Task::Gibbs  ? "gibbs"
                          : task == Task::Oracle ? "oracle"
                                                 : "bench";
  out << "[experiment]\ntask = " << task_name << "\nseed = " << optimizer.seed
      << "\noutput_dir = " << output_dir << "\n";
  out << "[hamiltonian]\nbuilder = " << hamiltonian.builder << "\nrows = " << hamiltonian.rows
      << "\ncols = " << hamiltonian.cols << "\nperiodic = " << (hamiltonian.periodic ? "true" : "false")
      << "\none_dimensional = " << (hamiltonian.one_dimensional ? "true" : "false")
      << "\nfile = " << hamiltonian.file << "\n";
  out << "[ansatz]\nbuilder = " << ansatz.builder << "\nn = " << ansatz.n << "\np = " << ansatz.p
      << "\nextra_ry = " << (ansatz.extra_ry ? "true" : "false")
      << "\nsymmetric = " << (ansatz.symmetric ? "true" : "false")
      << "\nelectrons = " << ansatz.electrons
      << "\nwith_ancilla = " << (ansatz.with_ancilla ? "true" : "false")
      << "\nuse_post_selection = " << (ansatz.use_post_selection ? "true" : "false") << "\n";
  out << "[objective]\nkind = " << objective_kind_name(objective.kind)
      << "\nlambda = " << objective.lambda << "\np0 = " << objective.p0
      << "\nbeta = " << objective.beta << "\n";
  out << "[optimizer]\ntrials = " << optimizer.trials << "\nmax_steps = " << optimizer.max_steps
      << "\nearly_stop_steps = " << optimizer.early_stop_steps
      << "\nconverge_eps = " << optimizer.converge_eps
      << "\nconverge_count = " << optimizer.converge_count
      << "\ncircuit_lr_base = " << optimizer.circuit_lr_base
      << "\ncircuit_lr_halflife = " << optimizer.circuit_lr_halflife
      << "\nneural_lr = " << optimizer.neural_lr
      << "\ncircuit_init_sigma = " << optimizer.circuit_init_sigma
      << "\nneural_init_sigma = " << optimizer.neural_init_sigma << "\n";
  out << "[gibbs]\nbeta_grid = ";
  for (std::size_t k = 0; k < beta_grid.size(); ++k) out << (k ? "," : "") << beta_grid[k];
  const char* scheme_name = scheme == GibbsScheme::Bounded     ? "bounded"
                            : scheme == GibbsScheme::Unbounded ? "unbounded"
                            : scheme == GibbsScheme::Uniform   ? "uniform"
                                                               : "preprocessing";
  out << "\nscheme = " << scheme_name << "\nreweighter_hidden = ";
  for (std::size_t k = 0; k < reweighter_hidden.size(); ++k)
    out << (k ? "," : "") << reweighter_hidden[k];
  out << "\n";
  return out.str();
}

}  // namespace vps
