#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "vps/autodiff.hpp"

namespace vps {

// Hyperparameters; defaults follow the thermal-state preparation table
// (the VQE tasks reuse them unless a config overrides).
struct OptimizerConfig {
  double circuit_lr_base = 0.08;
  double circuit_lr_halflife = 1200.0;  // decay 0.5^{step/halflife}
  double neural_lr = 0.015;
  double circuit_init_sigma = 0.02;
  double neural_init_sigma = 0.005;
  int max_steps = 3000;
  int early_stop_steps = 300;
  double converge_eps = 1e-7;
  int converge_count = 100;
  int trials = 50;
  std::uint64_t seed = 42;

  void validate() const {
    if (circuit_lr_base <= 0 || neural_lr <= 0 || circuit_lr_halflife <= 0)
      throw std::invalid_argument("learning rates must be positive");
    if (circuit_init_sigma <= 0 || neural_init_sigma <= 0)
      throw std::invalid_argument("init sigmas must be positive");
    if (max_steps < 1 || early_stop_steps < 1 || converge_count < 1 || trials < 1)
      throw std::invalid_argument("counts must be >= 1");
    if (converge_eps <= 0) throw std::invalid_argument("converge_eps must be positive");
  }

  double circuit_lr(int step) const {
    return circuit_lr_base * std::pow(0.5, step / circuit_lr_halflife);
  }
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One Adam update with per-group learning rates: the circuit group gets the
// decayed rate, the neural group a constant one.
inline void adam_step(AdamState& state, std::vector<double>& params,
                      const std::vector<double>& grads, int step_index, const ParamLayout& layout,
                      const OptimizerConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: size mismatch");
  for (double g : grads)
    if (!std::isfinite(g)) throw SimError("adam_step: non-finite gradient component");
  const double t = step_index + 1;
  const double corr1 = 1.0 - std::pow(state.beta1, t);
  const double corr2 = 1.0 - std::pow(state.beta2, t);
  const double lr_circuit = cfg.circuit_lr(step_index);
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * grads[k];
    state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * grads[k] * grads[k];
    double mhat = state.m[k] / corr1;
    double vhat = state.v[k] / corr2;
    double lr = (static_cast<int>(k) < layout.n_circuit) ? lr_circuit : cfg.neural_lr;
    params[k] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

struct TrialResult {
  bool ok = false;
  std::string error;
  std::uint64_t seed = 0;
  double best_value = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> param_snapshot;  // parameters at the best step
  std::vector<double> history;         // objective value per step
  std::vector<double> success_prob_history;
  std::map<int, std::vector<double>> checkpoints;  // step -> params (early stop, final)
  int steps = 0;
  double success_prob_final = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
};

// One optimization run: Gaussian init per group, Adam until the convergence
// rule (converge_count occurrences of a sub-eps step delta) or max_steps.
inline TrialResult run_trial(const Objective& objective, const OptimizerConfig& cfg,
                             std::uint64_t trial_seed) {
  cfg.validate();
  const ParamLayout layout = objective.layout();
  TrialResult result;
  result.seed = trial_seed;
  auto t_start = std::chrono::steady_clock::now();
  try {
    std::mt19937_64 rng(trial_seed);
    std::normal_distribution<double> g_circuit(0.0, cfg.circuit_init_sigma);
    std::normal_distribution<double> g_neural(0.0, cfg.neural_init_sigma);
    std::vector<double> params(static_cast<std::size_t>(layout.total()));
    for (int k = 0; k < layout.n_circuit; ++k) params[static_cast<std::size_t>(k)] = g_circuit(rng);
    for (int k = layout.n_circuit; k < layout.total(); ++k)
      params[static_cast<std::size_t>(k)] = g_neural(rng);

    AdamState adam(params.size());
    std::vector<double> grads(params.size());
    double best = std::numeric_limits<double>::infinity();
    double previous = std::numeric_limits<double>::quiet_NaN();
    int plateau_hits = 0;
    for (int step = 0; step < cfg.max_steps; ++step) {
      std::fill(grads.begin(), grads.end(), 0.0);
      ObjectiveEval ev = objective.eval(params, grads);
      if (!std::isfinite(ev.value)) throw SimError("objective returned a non-finite value");
      result.history.push_back(ev.value);
      if (!std::isnan(ev.success_prob)) result.success_prob_history.push_back(ev.success_prob);
      if (ev.value < best) {
        best = ev.value;
        result.param_snapshot = params;
      }
      if (step == cfg.early_stop_steps) result.checkpoints[cfg.early_stop_steps] = params;
      if (!std::isnan(previous) && std::abs(ev.value - previous) < cfg.converge_eps)
        ++plateau_hits;
      previous = ev.value;
      if (plateau_hits >= cfg.converge_count) break;
      adam_step(adam, params, grads, step, layout, cfg);
    }
    result.steps = static_cast<int>(result.history.size());
    result.checkpoints[result.steps] = params;
    result.best_value = best;
    if (!result.success_prob_history.empty())
      result.success_prob_final = result.success_prob_history.back();
    result.ok = true;
  } catch (const std::exception& ex) {
    result.ok = false;
    result.error = ex.what();
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

struct CampaignResult {
  std::vector<TrialResult> trials;  // indexed by trial number
  double best_value = std::numeric_limits<double>::quiet_NaN();
  int best_trial = -1;
  double percentile_25_best = std::numeric_limits<double>::quiet_NaN();
};

// Lower-quartile boundary of the sorted best values, linear interpolation.
inline double percentile_25(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  double pos = 0.25 * static_cast<double>(values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// Independent trials with seeds master+index, run on a small worker pool
// (capped by VPS_THREADS). Aggregation is index-ordered, so results do not
// depend on scheduling.
inline CampaignResult run_campaign(const Objective& objective, const OptimizerConfig& cfg) {
  cfg.validate();
  CampaignResult out;
  out.trials.resize(static_cast<std::size_t>(cfg.trials));
  const int workers = std::min(cfg.trials, worker_thread_count());
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int k = next.fetch_add(1);
      if (k >= cfg.trials) return;
      out.trials[static_cast<std::size_t>(k)] =
          run_trial(objective, cfg, cfg.seed + static_cast<std::uint64_t>(k));
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<double> bests;
  for (int k = 0; k < cfg.trials; ++k) {
    const TrialResult& t = out.trials[static_cast<std::size_t>(k)];
    if (!t.ok) continue;
    bests.push_back(t.best_value);
    if (!(t.best_value >= out.best_value)) {  // NaN-safe min
      out.best_value = t.best_value;
      out.best_trial = k;
    }
  }
  if (bests.empty()) throw SimError("run_campaign: every trial failed");
  out.percentile_25_best = percentile_25(bests);
  return out;
}

}  // namespace vps
