#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "vps/ansatz.hpp"
#include "vps/autodiff.hpp"
#include "vps/objectives.hpp"

using namespace vps;

namespace {

void check_against_fd(const Objective& obj, std::span<const double> params) {
  auto grad = gradient(obj, params);
  auto fd = finite_difference([&](std::span<const double> p) { return obj.value(p); }, params,
                              1e-4);
  REQUIRE(grad.size() == fd.size());
  for (std::size_t k = 0; k < grad.size(); ++k) {
    double tol = std::max(1e-5, 1e-4 * std::abs(fd[k]));
    INFO("component ", k, ": adjoint ", grad[k], " vs fd ", fd[k]);
    CHECK(std::abs(grad[k] - fd[k]) < tol);
  }
}

std::vector<double> random_params(std::size_t n, std::mt19937_64& rng, double sigma = 0.4) {
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> p(n);
  for (double& x : p) x = g(rng);
  return p;
}

}  // namespace

TEST_CASE("finite differences on closed forms") {
  SUBCASE("quadratic") {
    auto fn = [](std::span<const double> p) { return p[0] * p[0] + p[1] * p[1]; };
    std::vector<double> at{1.0, 2.0};
    auto fd = finite_difference(fn, at, 1e-5);
    CHECK(std::abs(fd[0] - 2.0) < 1e-6);
    CHECK(std::abs(fd[1] - 4.0) < 1e-6);
  }
  SUBCASE("constant") {
    auto fn = [](std::span<const double>) { return 3.5; };
    std::vector<double> at{0.3, -0.7, 1.1};
    for (double g : finite_difference(fn, at, 1e-4)) CHECK(g == doctest::Approx(0.0));
  }
  SUBCASE("step must be positive") {
    auto fn = [](std::span<const double>) { return 0.0; };
    std::vector<double> at{0.0};
    CHECK_THROWS_AS(finite_difference(fn, at, 0.0), std::invalid_argument);
  }
}

TEST_CASE("analytic single-gate gradient") {
  // <Z> after Rx(theta)|0> = cos(2 theta); d/dtheta = -2 sin(2 theta)
  CircuitIR c;
  c.n_qubits = 1;
  c.system_wires = {0};
  c.n_params = 1;
  c.gates.push_back(Gate::one(GateKind::Rx, 0, 0));
  PauliSum z(1);
  z.add_term(1.0, PauliString({{0, PauliAxis::Z}}, 1));
  VqeObjective obj(c, z, ObjectiveSpec{ObjectiveKind::Energy});
  SUBCASE("stationary at zero") {
    std::vector<double> p{0.0};
    CHECK(std::abs(gradient(obj, p)[0]) < 1e-12);
  }
  SUBCASE("closed form at pi/8") {
    std::vector<double> p{kPi / 8.0};
    CHECK(gradient(obj, p)[0] == doctest::Approx(-std::sqrt(2.0)));
    CHECK(obj.value(p) == doctest::Approx(std::cos(kPi / 4.0)));
  }
}

TEST_CASE("adjoint gradients match finite differences across ansatz families") {
  std::mt19937_64 rng(61);
  SUBCASE("plain hea energy") {
    auto c = build_hea(4, 2);
    VqeObjective obj(c, build_tfim(1, 4, true, true), ObjectiveSpec{ObjectiveKind::Energy});
    check_against_fd(obj, random_params(static_cast<std::size_t>(c.n_params), rng));
  }
  SUBCASE("hea with extra Ry layer") {
    auto c = build_hea(3, 2, true);
    VqeObjective obj(c, build_tfim(1, 3, true, true), ObjectiveSpec{ObjectiveKind::Energy});
    check_against_fd(obj, random_params(static_cast<std::size_t>(c.n_params), rng));
  }
  SUBCASE("post-selected energy (all-to-one ansatz with SU2 module)") {
    auto c = build_hea_postselect(4, 2);
    VqeObjective obj(c, build_tfim(1, 4, true, true), ObjectiveSpec{ObjectiveKind::Energy});
    check_against_fd(obj, random_params(static_cast<std::size_t>(c.n_params), rng));
  }
  SUBCASE("su2 ansatz with singlet projection") {
    auto c = build_su2_ansatz(4, 2, true);
    VqeObjective obj(c, build_heisenberg(2, 2, false), ObjectiveSpec{ObjectiveKind::Energy});
    check_against_fd(obj, random_params(static_cast<std::size_t>(c.n_params), rng));
  }
  SUBCASE("su2 ansatz with symmetry-breaking projection") {
    auto c = build_su2_ansatz(4, 1, false);
    VqeObjective obj(c, build_heisenberg(2, 2, false), ObjectiveSpec{ObjectiveKind::Energy});
    check_against_fd(obj, random_params(static_cast<std::size_t>(c.n_params), rng));
  }
  SUBCASE("u1 ansatz with ancilla") {
    auto c = build_u1_ansatz(4, 2, 2, true);
    VqeObjective obj(c, build_tfim(1, 4, true, true), ObjectiveSpec{ObjectiveKind::Energy});
    check_against_fd(obj, random_params(static_cast<std::size_t>(c.n_params), rng));
  }
}

TEST_CASE("gradient of the 53-parameter post-selected objective") {
  std::mt19937_64 rng(62);
  auto c = build_hea_postselect(12, 2);
  REQUIRE(c.n_params == 53);
  VqeObjective obj(c, build_tfim(4, 3, true, false), ObjectiveSpec{ObjectiveKind::Energy});
  check_against_fd(obj, random_params(53, rng, 0.15));
}

TEST_CASE("success-probability normalization has zero gradient") {
  // sum_k w_k = 1 identically, so the gradient of the summed weights
  // over every ancilla outcome must vanish
  std::mt19937_64 rng(63);
  auto c = build_hea_postselect(3, 1);
  auto params = random_params(static_cast<std::size_t>(c.n_params), rng);
  PauliSum h = build_tfim(1, 3, true, true);
  // omega(k=0) + omega(k=1): flip the post-selection and sum gradients of obj1
  // with lambda=-1, value-part weight 0 via H=0
  PauliSum zero(3);
  zero.add_term(0.0, PauliString({{0, PauliAxis::Z}}, 3));
  std::vector<double> total(static_cast<std::size_t>(c.n_params), 0.0);
  for (std::uint64_t outcome = 0; outcome < 2; ++outcome) {
    CircuitIR flipped = c;
    flipped.post_selection = PostSelection::bits({3}, outcome);
    ObjectiveSpec spec;
    spec.kind = ObjectiveKind::Obj1;
    spec.lambda = 1.0;  // objective = 0 - omega
    VqeObjective obj(flipped, zero, spec);
    auto grad = gradient(obj, params);
    for (std::size_t k = 0; k < grad.size(); ++k) total[k] += grad[k];
  }
  for (double gsum : total) CHECK(std::abs(gsum) < 1e-8);
}
