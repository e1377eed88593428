#include <random>

#include "doctest.h"
#include "vps/autodiff.hpp"
#include "vps/neural.hpp"

using namespace vps;

TEST_CASE("reweight_all basics") {
  SUBCASE("zero weights give the uniform distribution") {
    Reweighter r(3, {8}, false);
    r.weights.assign(r.weight_count(), 0.0);
    auto f = reweight_all(r);
    for (double v : f) CHECK(v == doctest::Approx(1.0 / 8.0));
  }
  SUBCASE("probabilities are positive and normalized") {
    Reweighter r = Reweighter::default_architecture(4, false);
    r.init_weights(0.5, 7);
    auto f = reweight_all(r);
    double sum = 0.0;
    for (double v : f) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-10);
  }
  SUBCASE("bounded variant caps the probability ratio at e^{2e}") {
    Reweighter r = Reweighter::default_architecture(3, true);
    r.init_weights(50.0, 11);  // drive the raw logits far out
    auto f = reweight_all(r);
    double lo = f[0], hi = f[0];
    for (double v : f) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi / lo <= std::exp(2.0 * r.bound) * (1.0 + 1e-9));
    for (std::uint64_t m = 0; m < 8; ++m) CHECK(std::abs(r.logit(m)) <= r.bound);
  }
  SUBCASE("enumeration cap enforced") {
    Reweighter r(13, {4}, false);
    r.weights.assign(r.weight_count(), 0.0);
    CHECK_THROWS_AS(reweight_all(r), CapacityError);
  }
}

TEST_CASE("reweighter gradients match finite differences") {
  std::mt19937_64 rng(12);
  for (bool bounded : {false, true}) {
    Reweighter r(3, {6, 5}, bounded);
    r.init_weights(0.3, 17);
    // scalar head: L = sum_m c_m f_m with fixed random c
    std::vector<double> c(8);
    std::normal_distribution<double> g(0.0, 1.0);
    for (double& v : c) v = g(rng);
    auto loss = [&](std::span<const double> w) {
      auto f = reweight_all(r, w);
      double acc = 0.0;
      for (std::size_t m = 0; m < f.size(); ++m) acc += c[m] * f[m];
      return acc;
    };
    auto tape = reweight_forward(r, r.weights);
    std::vector<double> grad(r.weight_count(), 0.0);
    reweight_backward(tape, c, grad);
    auto fd = finite_difference(loss, r.weights, 1e-5);
    for (std::size_t k = 0; k < grad.size(); ++k) {
      double tol = std::max(1e-5, 1e-4 * std::abs(fd[k]));
      CHECK(std::abs(grad[k] - fd[k]) < tol);
    }
  }
}

TEST_CASE("classical model sampling") {
  SUBCASE("uniform model has maximal entropy") {
    Reweighter model(4, {8}, false);
    model.weights.assign(model.weight_count(), 0.0);
    auto out = classical_model_sample(model, 10, 3);
    CHECK(out.entropy == doctest::Approx(4.0 * std::log(2.0)));
    CHECK(out.bitstrings.size() == 10);
    for (double lp : out.log_probs) CHECK(lp == doctest::Approx(std::log(1.0 / 16.0)));
  }
  SUBCASE("near-delta model has near-zero entropy") {
    // single linear layer on one bit lets us pin the logits directly:
    // logit(b) = w * x_b + bias with x in {+1,-1}
    Reweighter model(1, {}, false);
    model.weights = {30.0, 0.0};  // logit(+1)=30, logit(-1)=-30
    auto out = classical_model_sample(model, 5, 5);
    CHECK(out.entropy < 1e-10);
    for (const auto& s : out.bitstrings) CHECK(s == "0");
  }
  SUBCASE("entropy equals the brute-force sum") {
    Reweighter model(3, {5}, false);
    model.init_weights(0.8, 23);
    auto probs = reweight_all(model);
    double brute = 0.0;
    for (double p : probs) brute -= p * std::log(p);
    CHECK(std::abs(classical_model_sample(model, 0, 1).entropy - brute) < 1e-10);
  }
}
