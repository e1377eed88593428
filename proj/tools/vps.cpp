// vps - variational post-selection simulator
//
// Subcommands:
//   vps run <config>      run the experiment described by a config file
//   vps oracle ...        exact diagonalization baselines
//   vps plot <dir>        emit long-format plot CSVs from campaign artifacts
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.
// VPS_THREADS caps worker parallelism (default: hardware concurrency).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vps/config.hpp"
#include "vps/experiment.hpp"
#include "vps/thermal.hpp"
#include "vps/version.hpp"

namespace {

struct OracleOptions {
  std::string tfim;
  std::string heisenberg;
  std::string file;
  bool pbc = false;
  bool one_dimensional = false;
  double beta = 0.0;
  bool renyi2 = false;
  bool gibbs = false;
};

std::pair<int, int> parse_grid(const std::string& text, const std::string& flag) {
  auto x = text.find('x');
  try {
    if (x == std::string::npos) return {1, std::stoi(text)};
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw vps::ConfigError(flag, "expected RxC or N, got '" + text + "'");
  }
}

int run_oracle(const OracleOptions& opt) {
  using namespace vps;
  PauliSum h;
  if (!opt.tfim.empty()) {
    auto [rows, cols] = parse_grid(opt.tfim, "--tfim");
    h = build_tfim(rows, cols, opt.pbc, opt.one_dimensional || rows == 1);
  } else if (!opt.heisenberg.empty()) {
    auto [rows, cols] = parse_grid(opt.heisenberg, "--heisenberg");
    h = build_heisenberg(rows, cols, opt.pbc);
  } else if (!opt.file.empty()) {
    std::ifstream in(opt.file);
    if (!in) throw ConfigError("--file", "cannot open '" + opt.file + "'");
    h = parse_pauli_file(in);
  } else {
    throw ConfigError("oracle", "pick one of --tfim, --heisenberg, --file");
  }
  if (opt.beta > 0.0) {
    if (opt.renyi2 == opt.gibbs)
      throw ConfigError("oracle", "--beta needs exactly one of --renyi2 or --gibbs");
    if (opt.renyi2) {
      auto res = exact_renyi2(h, opt.beta);
      std::printf("renyi2 free energy: %.6f\n", res.free_energy);
      std::printf("ebar: %.6f\n", res.ebar);
      int support = 0;
      for (double p : res.distribution) support += p > 1e-12;
      std::printf("support: %d eigenstates\n", support);
    } else {
      auto rho = exact_gibbs(h, opt.beta);
      std::printf("gibbs free energy: %.6f\n", gibbs_free_energy_exact(rho, h, opt.beta));
    }
    return 0;
  }
  std::printf("ground energy: %.6f\n", ground_energy(h));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational post-selection simulator"};
  app.set_version_flag("--version", vps::kVersion);
  app.require_subcommand(1);
  app.footer(
      "exit codes: 0 = success, 1 = runtime failure, 2 = configuration error\n"
      "environment: VPS_THREADS caps worker parallelism");

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "config file (key = value sections, or JSON)")
      ->required();

  OracleOptions oracle;
  auto* orc = app.add_subcommand("oracle", "exact diagonalization baselines");
  orc->add_option("--tfim", oracle.tfim, "TFIM lattice, RxC or N");
  orc->add_option("--heisenberg", oracle.heisenberg, "Heisenberg lattice, RxC");
  orc->add_option("--file", oracle.file, "Pauli-string Hamiltonian file");
  orc->add_flag("--pbc", oracle.pbc, "periodic boundaries");
  orc->add_flag("--1d", oracle.one_dimensional, "treat the lattice as a chain/ring");
  orc->add_option("--beta", oracle.beta, "inverse temperature for thermal oracles");
  orc->add_flag("--renyi2", oracle.renyi2, "report the exact Renyi-2 thermal state");
  orc->add_flag("--gibbs", oracle.gibbs, "report the exact Gibbs state");

  std::string campaign_dir;
  auto* plot = app.add_subcommand("plot", "emit plot CSVs from campaign artifacts");
  plot->add_option("dir", campaign_dir, "campaign output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      auto cfg = vps::load_experiment_config(config_path);
      return vps::run_experiment(cfg, std::cout);
    }
    if (orc->parsed()) return run_oracle(oracle);
    if (plot->parsed()) return vps::emit_plot_data(campaign_dir, std::cout);
  } catch (const vps::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
