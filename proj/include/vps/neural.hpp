#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vps/common.hpp"

namespace vps {

// Small fully connected network mapping an ancilla bitstring to a logit
// g(a); reweight_all turns the logits into probabilities by softmax over
// every bitstring. The bounded variant squashes logits into [-bound, bound]
// through bound*tanh so the map stays smooth.
//
// Inputs encode bits as +-1 (bit 0 -> +1, bit 1 -> -1). Weights can either
// live inside the object or be supplied externally as one flat span laid
// out layer by layer (W then b), which is how the optimizer drives it.
struct Reweighter {
  std::vector<int> layer_sizes;  // e.g. {n_bits, 32, 32, 1}
  std::vector<double> weights;   // flat, optional storage
  bool bounded = false;
  double bound = 2.718281828459045;

  Reweighter() = default;
  Reweighter(int n_bits, std::vector<int> hidden, bool bounded_, double bound_ = 2.718281828459045)
      : bounded(bounded_), bound(bound_) {
    if (n_bits < 1) throw std::invalid_argument("reweighter needs at least one input bit");
    layer_sizes.push_back(n_bits);
    for (int hsize : hidden) {
      if (hsize < 1) throw std::invalid_argument("hidden layer size must be positive");
      layer_sizes.push_back(hsize);
    }
    layer_sizes.push_back(1);
  }

  static Reweighter default_architecture(int n_bits, bool bounded) {
    return Reweighter(n_bits, {32, 32}, bounded);
  }

  int n_bits() const { return layer_sizes.front(); }
  int n_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }

  std::size_t weight_count() const {
    std::size_t c = 0;
    for (int l = 0; l < n_layers(); ++l)
      c += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] + layer_sizes[l + 1];
    return c;
  }

  void init_weights(double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    weights.assign(weight_count(), 0.0);
    for (double& w : weights) w = g(rng);
  }

  // logit for one bitstring index
  double logit(std::uint64_t bits, std::span<const double> w) const {
    std::vector<double> x = encode(bits);
    std::vector<double> next;
    std::size_t off = 0;
    for (int l = 0; l < n_layers(); ++l) {
      const int in = layer_sizes[l], out = layer_sizes[l + 1];
      next.assign(static_cast<std::size_t>(out), 0.0);
      for (int o = 0; o < out; ++o) {
        double acc = w[off + static_cast<std::size_t>(out) * in + o];  // bias
        const double* row = &w[off + static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
        next[static_cast<std::size_t>(o)] = (l + 1 < n_layers()) ? std::tanh(acc) : acc;
      }
      off += static_cast<std::size_t>(in) * out + out;
      x.swap(next);
    }
    double raw = x[0];
    return bounded ? bound * std::tanh(raw) : raw;
  }
  double logit(std::uint64_t bits) const { return logit(bits, weights); }

  std::vector<double> encode(std::uint64_t bits) const {
    const int nb = n_bits();
    std::vector<double> x(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k)
      x[static_cast<std::size_t>(k)] = ((bits >> (nb - 1 - k)) & 1u) ? -1.0 : 1.0;
    return x;
  }
};

namespace detail {

inline constexpr int kMaxEnumerableBits = 12;

inline void check_enumerable(const Reweighter& r) {
  if (r.n_bits() > kMaxEnumerableBits)
    throw CapacityError("reweighter input of " + std::to_string(r.n_bits()) +
                        " bits is not enumerable (cap " + std::to_string(kMaxEnumerableBits) +
                        ")");
}

}  // namespace detail

// Forward pass over every bitstring with stored activations, so gradients
// can be pushed back through softmax, bounding, and the dense layers.
struct ReweighterTape {
  const Reweighter* net = nullptr;
  std::span<const double> w;
  std::vector<std::vector<double>> activations;  // per bitstring, concatenated layer outputs
  std::vector<double> raw;                       // pre-bounding output
  std::vector<double> f;                         // softmax probabilities
};

inline ReweighterTape reweight_forward(const Reweighter& r, std::span<const double> w) {
  detail::check_enumerable(r);
  if (w.size() != r.weight_count())
    throw std::invalid_argument("reweighter weight span has wrong length");
  const std::uint64_t count = std::uint64_t{1} << r.n_bits();
  ReweighterTape tape;
  tape.net = &r;
  tape.w = w;
  tape.activations.resize(count);
  tape.raw.resize(count);
  std::vector<double> logits(count);
  for (std::uint64_t m = 0; m < count; ++m) {
    std::vector<double> x = r.encode(m);
    std::vector<double>& acts = tape.activations[m];
    acts.insert(acts.end(), x.begin(), x.end());
    std::size_t off = 0;
    for (int l = 0; l < r.n_layers(); ++l) {
      const int in = r.layer_sizes[static_cast<std::size_t>(l)];
      const int out = r.layer_sizes[static_cast<std::size_t>(l) + 1];
      std::vector<double> next(static_cast<std::size_t>(out));
      for (int o = 0; o < out; ++o) {
        double acc = w[off + static_cast<std::size_t>(out) * in + o];
        const double* row = &w[off + static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
        next[static_cast<std::size_t>(o)] = (l + 1 < r.n_layers()) ? std::tanh(acc) : acc;
      }
      off += static_cast<std::size_t>(in) * out + out;
      acts.insert(acts.end(), next.begin(), next.end());
      x.swap(next);
    }
    tape.raw[m] = x[0];
    logits[m] = r.bounded ? r.bound * std::tanh(x[0]) : x[0];
  }
  // softmax, stabilized
  double top = logits[0];
  for (double v : logits) top = std::max(top, v);
  double z = 0.0;
  tape.f.resize(count);
  for (std::uint64_t m = 0; m < count; ++m) {
    tape.f[m] = std::exp(logits[m] - top);
    z += tape.f[m];
  }
  for (double& v : tape.f) v /= z;
  double check = 0.0;
  for (double v : tape.f) check += v;
  if (std::abs(check - 1.0) > 1e-10) throw SimError("reweighter normalization drifted");
  return tape;
}

// Probabilities f(a) over all 2^{n_bits} ancilla bitstrings; positive and
// summing to one by construction.
inline std::vector<double> reweight_all(const Reweighter& r, std::span<const double> w) {
  return reweight_forward(r, w).f;
}
inline std::vector<double> reweight_all(const Reweighter& r) {
  return reweight_all(r, r.weights);
}

// Accumulates dL/dw given dL/df into grad_w (laid out like the weights).
inline void reweight_backward(const ReweighterTape& tape, std::span<const double> df,
                              std::span<double> grad_w) {
  const Reweighter& r = *tape.net;
  const std::uint64_t count = std::uint64_t{1} << r.n_bits();
  if (df.size() != count || grad_w.size() != r.weight_count())
    throw std::invalid_argument("reweight_backward: bad buffer sizes");
  // softmax backward: dL/d logit_m = f_m (df_m - sum_b f_b df_b)
  double mix = 0.0;
  for (std::uint64_t m = 0; m < count; ++m) mix += tape.f[m] * df[m];
  for (std::uint64_t m = 0; m < count; ++m) {
    double dlogit = tape.f[m] * (df[m] - mix);
    double draw = r.bounded
                      ? dlogit * r.bound * (1.0 - std::tanh(tape.raw[m]) * std::tanh(tape.raw[m]))
                      : dlogit;
    // walk layers backward through the stored activations
    const auto& acts = tape.activations[m];
    std::vector<std::size_t> layer_off(static_cast<std::size_t>(r.n_layers()) + 1);
    std::vector<std::size_t> weight_off(static_cast<std::size_t>(r.n_layers()) + 1);
    layer_off[0] = 0;
    weight_off[0] = 0;
    for (int l = 0; l < r.n_layers(); ++l) {
      layer_off[static_cast<std::size_t>(l) + 1] =
          layer_off[static_cast<std::size_t>(l)] +
          static_cast<std::size_t>(r.layer_sizes[static_cast<std::size_t>(l)]);
      weight_off[static_cast<std::size_t>(l) + 1] =
          weight_off[static_cast<std::size_t>(l)] +
          static_cast<std::size_t>(r.layer_sizes[static_cast<std::size_t>(l)]) *
              r.layer_sizes[static_cast<std::size_t>(l) + 1] +
          r.layer_sizes[static_cast<std::size_t>(l) + 1];
    }
    std::vector<double> delta{draw};
    for (int l = r.n_layers() - 1; l >= 0; --l) {
      const int in = r.layer_sizes[static_cast<std::size_t>(l)];
      const int out = r.layer_sizes[static_cast<std::size_t>(l) + 1];
      const double* x = &acts[layer_off[static_cast<std::size_t>(l)]];
      const double* y = &acts[layer_off[static_cast<std::size_t>(l) + 1]];
      std::size_t woff = weight_off[static_cast<std::size_t>(l)];
      // tanh derivative on this layer's outputs (not on the linear final layer)
      std::vector<double> dz(static_cast<std::size_t>(out));
      for (int o = 0; o < out; ++o)
        dz[static_cast<std::size_t>(o)] =
            (l + 1 < r.n_layers()) ? delta[static_cast<std::size_t>(o)] * (1.0 - y[o] * y[o])
                                   : delta[static_cast<std::size_t>(o)];
      std::vector<double> dx(static_cast<std::size_t>(in), 0.0);
      for (int o = 0; o < out; ++o) {
        const double g = dz[static_cast<std::size_t>(o)];
        double* wrow_g = &grad_w[woff + static_cast<std::size_t>(o) * in];
        const double* wrow = &tape.w[woff + static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) {
          wrow_g[i] += g * x[i];
          dx[static_cast<std::size_t>(i)] += g * wrow[i];
        }
        grad_w[woff + static_cast<std::size_t>(out) * in + o] += g;  // bias
      }
      delta.swap(dx);
    }
  }
}

// The classical probability model of the pre-processing baseline: the same
// softmax network read as a distribution over full input bitstrings.
struct ClassicalSamples {
  std::vector<std::string> bitstrings;
  std::vector<double> log_probs;
  double entropy = 0.0;  // exact -sum P lnP of the model, not the sample
};

inline double classical_entropy(const std::vector<double>& probs) {
  double s = 0.0;
  for (double p : probs)
    if (p > 0.0) s -= p * std::log(p);
  return s;
}

inline ClassicalSamples classical_model_sample(const Reweighter& model, int count,
                                               std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("sample count must be non-negative");
  auto probs = reweight_all(model, model.weights);
  ClassicalSamples out;
  out.entropy = classical_entropy(probs);
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, acc);
  for (int s = 0; s < count; ++s) {
    double u = unit(rng);
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    std::uint64_t idx = static_cast<std::uint64_t>(it - cdf.begin());
    if (idx >= probs.size()) idx = probs.size() - 1;
    out.bitstrings.push_back(index_to_bitstring(idx, model.n_bits()));
    out.log_probs.push_back(std::log(probs[idx]));
  }
  return out;
}

}  // namespace vps
