#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "vps/pauli.hpp"

using namespace vps;

namespace {

int count_terms_of_weight(const PauliSum& h, std::size_t weight) {
  int c = 0;
  for (const auto& [coeff, s] : h.terms) {
    (void)coeff;
    if (s.ops.size() == weight) ++c;
  }
  return c;
}

// brute-force edge enumeration for PBC grids, used as the oracle for the
// builder's term counts
int pbc_edge_count(int rows, int cols) {
  std::set<std::pair<int, int>> edges;
  auto site = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      int neighbors[2][2] = {{r, (c + 1) % cols}, {(r + 1) % rows, c}};
      for (auto& nb : neighbors) {
        int a = site(r, c), b = site(nb[0], nb[1]);
        if (a == b) continue;
        edges.insert({std::min(a, b), std::max(a, b)});
      }
    }
  return static_cast<int>(edges.size());
}

}  // namespace

TEST_CASE("tfim builder term counts") {
  SUBCASE("ring of 8 sites") {
    auto h = build_tfim(1, 8, true, true);
    CHECK(h.n_qubits == 8);
    CHECK(count_terms_of_weight(h, 2) == 8);
    CHECK(count_terms_of_weight(h, 1) == 8);
  }
  SUBCASE("4x3 periodic grid") {
    auto h = build_tfim(4, 3, true, false);
    CHECK(count_terms_of_weight(h, 2) == pbc_edge_count(4, 3));
    CHECK(count_terms_of_weight(h, 2) == 24);
    CHECK(count_terms_of_weight(h, 1) == 12);
  }
  SUBCASE("single open bond") {
    auto h = build_tfim(1, 2, false, true);
    CHECK(count_terms_of_weight(h, 2) == 1);
    CHECK(count_terms_of_weight(h, 1) == 2);
  }
  SUBCASE("PBC edge count is 2*rows*cols for rows,cols >= 3") {
    for (int r = 3; r <= 4; ++r)
      for (int c = 3; c <= 4; ++c) {
        auto h = build_tfim(r, c, true, false);
        CHECK(count_terms_of_weight(h, 2) == 2 * r * c);
      }
  }
  SUBCASE("2xL wrap edges merge with doubled coefficient") {
    auto h = build_tfim(2, 4, true, false);
    // vertical wrap duplicates the (r0,r1) bond in every column
    int doubled = 0;
    for (const auto& [c, s] : h.terms)
      if (s.ops.size() == 2 && c == 2.0) ++doubled;
    CHECK(doubled == 4);
  }
  SUBCASE("rejects degenerate lattices") {
    CHECK_THROWS_AS(build_tfim(1, 1, false, true), std::invalid_argument);
  }
}

TEST_CASE("heisenberg builder") {
  SUBCASE("two sites") {
    auto h = build_heisenberg(1, 2, false);
    CHECK(h.terms.size() == 3);
  }
  SUBCASE("4x3 periodic = 72 terms") {
    auto h = build_heisenberg(4, 3, true);
    CHECK(h.terms.size() == 72);
  }
  SUBCASE("2x2 open = 12 terms") {
    auto h = build_heisenberg(2, 2, false);
    CHECK(h.terms.size() == 12);
  }
}

TEST_CASE("term merging is exact") {
  PauliSum s(2);
  s.add_term(0.25, PauliString({{0, PauliAxis::Z}, {1, PauliAxis::Z}}, 2));
  s.add_term(0.5, PauliString({{0, PauliAxis::Z}, {1, PauliAxis::Z}}, 2));
  REQUIRE(s.terms.size() == 1);
  CHECK(s.terms[0].first == 0.75);
}

TEST_CASE("pauli file parsing") {
  SUBCASE("basic two-term file") {
    auto h = parse_pauli_text("0.5 Z0 Z1\n-1.0 X0\n");
    CHECK(h.n_qubits == 2);
    CHECK(h.terms.size() == 2);
  }
  SUBCASE("identity with qubit header") {
    auto h = parse_pauli_text("qubits 9\n0.7137\n");
    CHECK(h.n_qubits == 9);
    REQUIRE(h.terms.size() == 1);
    CHECK(h.terms[0].second.is_identity());
    CHECK(h.terms[0].first == doctest::Approx(0.7137));
  }
  SUBCASE("comments and blank lines") {
    auto h = parse_pauli_text("# a hamiltonian\n\n1.0 X0  # transverse field\n");
    CHECK(h.terms.size() == 1);
  }
  SUBCASE("malformed token reports the line") {
    try {
      parse_pauli_text("1.0 X0\n2.0 W3\n");
      FAIL("expected ParseError");
    } catch (const ParseError& err) {
      CHECK(err.line_number == 2);
    }
  }
  SUBCASE("duplicate axis on one qubit rejected") {
    CHECK_THROWS_AS(parse_pauli_text("1.0 X0 Z0\n"), ParseError);
  }
  SUBCASE("index beyond declared count rejected") {
    CHECK_THROWS_AS(parse_pauli_text("qubits 2\n1.0 Z5\n"), ParseError);
  }
  SUBCASE("duplicate strings merge on parse") {
    auto h = parse_pauli_text("1.0 Z0\n2.5 Z0\n");
    REQUIRE(h.terms.size() == 1);
    CHECK(h.terms[0].first == 3.5);
  }
}

TEST_CASE("serialize/parse round trip on random sums") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto sum = testutil::random_pauli_sum(4, 6, rng);
    auto text = serialize_pauli(sum);
    auto back = parse_pauli_text(text);
    CHECK(back == sum);
    CHECK(serialize_pauli(back) == text);
  }
}

TEST_CASE("dense matrices of small sums are Hermitian") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto sum = testutil::random_pauli_sum(4, 5, rng);
    auto m = dense_matrix(sum);
    const std::uint64_t dim = 16;
    for (std::uint64_t i = 0; i < dim; ++i)
      for (std::uint64_t j = 0; j < dim; ++j)
        CHECK(std::abs(m[i * dim + j] - std::conj(m[j * dim + i])) < 1e-12);
  }
}

TEST_CASE("embed re-indexes onto a wider register") {
  PauliSum h(2);
  h.add_term(1.0, PauliString({{0, PauliAxis::Z}, {1, PauliAxis::X}}, 2));
  auto wide = h.embed({1, 3}, 4);
  CHECK(wide.n_qubits == 4);
  REQUIRE(wide.terms.size() == 1);
  CHECK(wide.terms[0].second.ops.at(1) == PauliAxis::Z);
  CHECK(wide.terms[0].second.ops.at(3) == PauliAxis::X);
}
