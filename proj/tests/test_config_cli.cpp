#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "vps/config.hpp"
#include "vps/experiment.hpp"

using namespace vps;

namespace {

ExperimentConfig parse_ini_text(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in, false);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("ini config parsing") {
  auto cfg = parse_ini_text(
      "[experiment]\n"
      "task = vqe\n"
      "seed = 7\n"
      "output_dir = runs/x\n"
      "[hamiltonian]\n"
      "builder = tfim\n"
      "rows = 4\n"
      "cols = 3\n"
      "periodic = true\n"
      "[ansatz]\n"
      "builder = hea_postselect\n"
      "n = 12\n"
      "p = 2\n"
      "[optimizer]\n"
      "trials = 20\n"
      "max_steps = 1500\n");
  CHECK(cfg.task == Task::Vqe);
  CHECK(cfg.optimizer.seed == 7);
  CHECK(cfg.hamiltonian.rows == 4);
  CHECK(cfg.ansatz.builder == "hea_postselect");
  CHECK(cfg.optimizer.trials == 20);
  CHECK(cfg.optimizer.max_steps == 1500);
  CHECK(cfg.optimizer.circuit_lr_base == 0.08);  // defaults fall through

  SUBCASE("canonical text is stable and hashable") {
    auto text = cfg.canonical_text();
    CHECK(text == cfg.canonical_text());
    CHECK(fnv1a(text) != 0);
  }
}

TEST_CASE("json config parsing") {
  std::istringstream in(R"({
    "experiment": {"task": "gibbs", "seed": 9, "output_dir": "runs/g"},
    "hamiltonian": {"builder": "tfim", "rows": 1, "cols": 4, "periodic": true,
                     "one_dimensional": true},
    "ansatz": {"builder": "thermal", "n": 4, "p": 2},
    "objective": {"kind": "renyi2"},
    "gibbs": {"beta_grid": [0.5, 1.0], "scheme": "bounded"}
  })");
  auto cfg = parse_experiment_config(in, true);
  CHECK(cfg.task == Task::Gibbs);
  CHECK(cfg.scheme == GibbsScheme::Bounded);
  CHECK(cfg.beta_grid == std::vector<double>{0.5, 1.0});
  CHECK(cfg.objective.kind == ObjectiveKind::Renyi2);
}

TEST_CASE("config validation errors carry field paths") {
  SUBCASE("unknown builder") {
    try {
      auto cfg = parse_ini_text("[ansatz]\nbuilder = nope\n");
      cfg.ansatz.build();
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field_path == "ansatz.builder");
    }
  }
  SUBCASE("unknown key rejected") {
    CHECK_THROWS_AS(parse_ini_text("[optimizer]\nlearning = 1\n"), ConfigError);
  }
  SUBCASE("bad number rejected") {
    CHECK_THROWS_AS(parse_ini_text("[optimizer]\ntrials = many\n"), ConfigError);
  }
  SUBCASE("negative beta rejected") {
    CHECK_THROWS_AS(parse_ini_text("[experiment]\ntask = gibbs\n[gibbs]\nbeta_grid = -1\n"),
                    ConfigError);
  }
}

TEST_CASE("vqe experiment end to end at desk scale") {
  TempDir tmp("vps_test_vqe");
  auto cfg = parse_ini_text(
      "[experiment]\ntask = vqe\nseed = 3\n"
      "[hamiltonian]\nbuilder = tfim\nrows = 1\ncols = 3\nperiodic = true\none_dimensional = true\n"
      "[ansatz]\nbuilder = hea_postselect\nn = 3\np = 1\n"
      "[optimizer]\ntrials = 2\nmax_steps = 60\n");
  cfg.output_dir = (tmp.path / "out").string();
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  CHECK(std::filesystem::exists(tmp.path / "out" / "manifest.json"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "summary.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "campaign.json"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "trials" / "trial_000.json"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "trials" / "trial_001.json"));

  SUBCASE("rerun reproduces the summary byte for byte") {
    std::ifstream first(tmp.path / "out" / "campaign.json");
    std::stringstream a;
    a << first.rdbuf();
    auto cfg2 = cfg;
    cfg2.output_dir = (tmp.path / "out2").string();
    std::ostringstream log2;
    run_experiment(cfg2, log2);
    std::ifstream second(tmp.path / "out2" / "campaign.json");
    std::stringstream b;
    b << second.rdbuf();
    CHECK(a.str() == b.str());
  }

  SUBCASE("plot emission is deterministic and complete") {
    std::ostringstream plog;
    CHECK(emit_plot_data((tmp.path / "out").string(), plog) == 0);
    std::ifstream p1(tmp.path / "out" / "plot_energy.csv");
    std::stringstream a;
    a << p1.rdbuf();
    CHECK(a.str().find("x,series,value") == 0);
    CHECK(a.str().find("best_relative_error") != std::string::npos);
    emit_plot_data((tmp.path / "out").string(), plog);
    std::ifstream p2(tmp.path / "out" / "plot_energy.csv");
    std::stringstream b;
    b << p2.rdbuf();
    CHECK(a.str() == b.str());
  }
}

TEST_CASE("gibbs experiment end to end at desk scale") {
  TempDir tmp("vps_test_gibbs");
  auto cfg = parse_ini_text(
      "[experiment]\ntask = gibbs\nseed = 5\n"
      "[hamiltonian]\nbuilder = tfim\nrows = 1\ncols = 2\nperiodic = false\none_dimensional = "
      "true\n"
      "[ansatz]\nbuilder = thermal\nn = 2\np = 1\n"
      "[objective]\nkind = renyi2\n"
      "[optimizer]\ntrials = 2\nmax_steps = 80\nearly_stop_steps = 40\n"
      "[gibbs]\nbeta_grid = 1\nscheme = bounded\nreweighter_hidden = 8\n");
  cfg.output_dir = (tmp.path / "out").string();
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  CHECK(std::filesystem::exists(tmp.path / "out" / "gibbs_metrics.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "rho_beta0_early.dm"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "rho_beta0_converged.dm"));
  auto rho = load_density_matrix((tmp.path / "out" / "rho_beta0_converged.dm").string());
  CHECK(rho.n_qubits == 2);
  CHECK(std::abs(rho.trace_real() - 1.0) < 1e-8);

  std::ostringstream plog;
  CHECK(emit_plot_data((tmp.path / "out").string(), plog) == 0);
  std::ifstream p(tmp.path / "out" / "plot_fidelity.csv");
  std::stringstream s;
  s << p.rdbuf();
  CHECK(s.str().find("bounded/early/fidelity_gibbs") != std::string::npos);
  CHECK(s.str().find("bounded/converged/fidelity_renyi") != std::string::npos);
}

TEST_CASE("plot on missing artifacts names the expected file") {
  TempDir tmp("vps_test_plot");
  std::ostringstream log;
  try {
    emit_plot_data((tmp.path / "nowhere").string(), log);
    FAIL("expected error");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find("manifest.json") != std::string::npos);
  }
}

TEST_CASE("pauli hamiltonian file round trip through the config layer") {
  TempDir tmp("vps_test_hfile");
  auto path = tmp.path / "h.txt";
  std::ofstream out(path);
  out << "# two-site toy\nqubits 2\n0.5 Z0 Z1\n-1 X0\n-1 X1\n";
  out.close();
  ExperimentConfig cfg;
  cfg.hamiltonian.builder = "file";
  cfg.hamiltonian.file = path.string();
  auto h = cfg.hamiltonian.build();
  CHECK(h.n_qubits == 2);
  CHECK(h.terms.size() == 3);
}
