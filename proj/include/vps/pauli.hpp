#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vps/common.hpp"

namespace vps {

enum class PauliAxis : char { X = 'X', Y = 'Y', Z = 'Z' };

// A single Pauli word: identity everywhere except the listed qubits.
struct PauliString {
  std::map<int, PauliAxis> ops;
  int n_qubits = 0;

  PauliString() = default;
  PauliString(std::map<int, PauliAxis> o, int n) : ops(std::move(o)), n_qubits(n) {
    for (const auto& [q, ax] : ops) {
      (void)ax;
      if (q < 0 || q >= n_qubits)
        throw std::invalid_argument("pauli qubit index " + std::to_string(q) +
                                    " out of range for " + std::to_string(n_qubits) + " qubits");
    }
  }

  bool is_identity() const { return ops.empty(); }

  bool operator==(const PauliString& other) const {
    return n_qubits == other.n_qubits && ops == other.ops;
  }
  bool operator<(const PauliString& other) const {
    if (n_qubits != other.n_qubits) return n_qubits < other.n_qubits;
    auto key = [](const std::map<int, PauliAxis>& m) {
      std::vector<std::pair<int, char>> v;
      for (const auto& [q, ax] : m) v.emplace_back(q, static_cast<char>(ax));
      return v;
    };
    return key(ops) < key(other.ops);
  }

  std::string to_string() const {
    if (ops.empty()) return "I";
    std::string s;
    for (const auto& [q, ax] : ops) {
      if (!s.empty()) s += ' ';
      s += static_cast<char>(ax);
      s += std::to_string(q);
    }
    return s;
  }
};

// Weighted sum of Pauli strings. Terms are kept merged and sorted so two
// sums built from the same physics compare equal.
struct PauliSum {
  std::vector<std::pair<double, PauliString>> terms;
  int n_qubits = 0;

  PauliSum() = default;
  explicit PauliSum(int n) : n_qubits(n) {}

  void add_term(double coeff, PauliString s) {
    if (!std::isfinite(coeff)) throw std::invalid_argument("non-finite Pauli coefficient");
    if (s.n_qubits != n_qubits)
      throw std::invalid_argument("term qubit count does not match sum");
    for (auto& [c, t] : terms) {
      if (t == s) {
        c += coeff;
        return;
      }
    }
    terms.emplace_back(coeff, std::move(s));
  }

  void canonicalize() {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    terms.erase(std::remove_if(terms.begin(), terms.end(),
                               [](const auto& t) { return t.first == 0.0; }),
                terms.end());
  }

  double norm1() const {
    double s = 0.0;
    for (const auto& [c, t] : terms) {
      (void)t;
      s += std::abs(c);
    }
    return s;
  }

  // Re-index every term onto a wider register: system qubit k -> wires[k].
  PauliSum embed(const std::vector<int>& wires, int n_total) const {
    if (static_cast<int>(wires.size()) != n_qubits)
      throw std::invalid_argument("embed: wire list size does not match operator");
    PauliSum out(n_total);
    for (const auto& [c, s] : terms) {
      std::map<int, PauliAxis> ops;
      for (const auto& [q, ax] : s.ops) ops[wires.at(static_cast<std::size_t>(q))] = ax;
      out.add_term(c, PauliString(std::move(ops), n_total));
    }
    out.canonicalize();
    return out;
  }

  bool operator==(const PauliSum& other) const {
    return n_qubits == other.n_qubits && terms == other.terms;
  }
};

namespace detail {

// Undirected nearest-neighbour edges of a rows x cols grid, with optional
// periodic wrap. Wrap edges that coincide with existing ones (extent 2)
// or with themselves (extent 1) are handled by the caller's term merging.
inline std::vector<std::pair<int, int>> grid_edges(int rows, int cols, bool periodic) {
  auto site = [cols](int r, int c) { return r * cols + c; };
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols)
        edges.emplace_back(site(r, c), site(r, c + 1));
      else if (periodic && cols > 1)
        edges.emplace_back(site(r, c), site(r, 0));
      if (r + 1 < rows)
        edges.emplace_back(site(r, c), site(r + 1, c));
      else if (periodic && rows > 1)
        edges.emplace_back(site(r, c), site(0, c));
    }
  for (auto& [a, b] : edges)
    if (a > b) std::swap(a, b);
  return edges;
}

}  // namespace detail

// H = sum_<ij> Z_i Z_j - sum_i X_i on a rows x cols lattice.
// one_dimensional treats the lattice as a chain/ring of rows*cols sites.
inline PauliSum build_tfim(int rows, int cols, bool periodic, bool one_dimensional) {
  const int n = rows * cols;
  if (n < 2) throw std::invalid_argument("build_tfim: need at least 2 sites");
  PauliSum h(n);
  auto edges = one_dimensional ? detail::grid_edges(1, n, periodic)
                               : detail::grid_edges(rows, cols, periodic);
  for (const auto& [a, b] : edges)
    h.add_term(1.0, PauliString({{a, PauliAxis::Z}, {b, PauliAxis::Z}}, n));
  for (int i = 0; i < n; ++i) h.add_term(-1.0, PauliString({{i, PauliAxis::X}}, n));
  h.canonicalize();
  return h;
}

// H = sum_<ij> X_i X_j + Y_i Y_j + Z_i Z_j on a rows x cols lattice.
inline PauliSum build_heisenberg(int rows, int cols, bool periodic) {
  const int n = rows * cols;
  if (n < 2) throw std::invalid_argument("build_heisenberg: need at least 2 sites");
  PauliSum h(n);
  for (const auto& [a, b] : detail::grid_edges(rows, cols, periodic)) {
    h.add_term(1.0, PauliString({{a, PauliAxis::X}, {b, PauliAxis::X}}, n));
    h.add_term(1.0, PauliString({{a, PauliAxis::Y}, {b, PauliAxis::Y}}, n));
    h.add_term(1.0, PauliString({{a, PauliAxis::Z}, {b, PauliAxis::Z}}, n));
  }
  h.canonicalize();
  return h;
}

// Line-oriented Hamiltonian file:
//   # comment
//   qubits 9
//   0.5 Z0 Z1
//   -1.0 X0
//   0.7137            <- identity term
// Qubit count defaults to 1 + max index when no header is present.
inline PauliSum parse_pauli_file(std::istream& in) {
  struct RawTerm {
    double coeff;
    std::map<int, PauliAxis> ops;
    int line;
  };
  std::vector<RawTerm> raw;
  int declared_qubits = -1;
  int max_index = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "qubits") {
      if (!(ls >> declared_qubits) || declared_qubits <= 0)
        throw ParseError("bad qubit count in header", line_no);
      std::string extra;
      if (ls >> extra) throw ParseError("trailing token '" + extra + "' after qubit header", line_no);
      continue;
    }
    RawTerm term;
    term.line = line_no;
    try {
      std::size_t pos = 0;
      term.coeff = std::stod(first, &pos);
      if (pos != first.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError("expected a real coefficient, got '" + first + "'", line_no);
    }
    std::string tok;
    while (ls >> tok) {
      if (tok.size() < 2 || (tok[0] != 'X' && tok[0] != 'Y' && tok[0] != 'Z'))
        throw ParseError("malformed Pauli token '" + tok + "'", line_no);
      int q = 0;
      try {
        std::size_t pos = 0;
        q = std::stoi(tok.substr(1), &pos);
        if (pos + 1 != tok.size() || q < 0) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("malformed Pauli token '" + tok + "'", line_no);
      }
      auto axis = static_cast<PauliAxis>(tok[0]);
      if (term.ops.count(q))
        throw ParseError("duplicate qubit " + std::to_string(q) + " in one term", line_no);
      term.ops[q] = axis;
      max_index = std::max(max_index, q);
    }
    raw.push_back(std::move(term));
  }
  int n = declared_qubits > 0 ? declared_qubits : max_index + 1;
  if (n <= 0) throw ParseError("file declares no qubits and no terms", std::max(line_no, 1));
  PauliSum sum(n);
  for (auto& t : raw) {
    for (const auto& [q, ax] : t.ops) {
      (void)ax;
      if (q >= n)
        throw ParseError("qubit index " + std::to_string(q) + " exceeds declared count " +
                             std::to_string(n),
                         t.line);
    }
    sum.add_term(t.coeff, PauliString(std::move(t.ops), n));
  }
  sum.canonicalize();
  return sum;
}

inline PauliSum parse_pauli_text(const std::string& text) {
  std::istringstream in(text);
  return parse_pauli_file(in);
}

// Canonical text form; parse(serialize(s)) == s exactly.
inline std::string serialize_pauli(const PauliSum& sum) {
  std::ostringstream out;
  out << "qubits " << sum.n_qubits << "\n";
  PauliSum canon = sum;
  canon.canonicalize();
  out.precision(17);
  for (const auto& [c, s] : canon.terms) {
    out << c;
    for (const auto& [q, ax] : s.ops) out << ' ' << static_cast<char>(ax) << q;
    out << "\n";
  }
  return out.str();
}

// Dense matrix of the sum, row-major. Intended for oracles; capped hard.
inline std::vector<cx> dense_matrix(const PauliSum& h, int max_qubits = 12) {
  if (h.n_qubits > max_qubits)
    throw CapacityError("dense_matrix: " + std::to_string(h.n_qubits) + " qubits exceeds cap of " +
                        std::to_string(max_qubits));
  const std::uint64_t dim = std::uint64_t{1} << h.n_qubits;
  std::vector<cx> m(dim * dim, cx{0.0, 0.0});
  for (const auto& [coeff, s] : h.terms) {
    std::uint64_t flip = 0;
    std::uint64_t y_mask = 0, z_mask = 0;
    int y_count = 0;
    for (const auto& [q, ax] : s.ops) {
      std::uint64_t bm = bitmask_of(q, h.n_qubits);
      switch (ax) {
        case PauliAxis::X: flip |= bm; break;
        case PauliAxis::Y: flip |= bm; y_mask |= bm; ++y_count; break;
        case PauliAxis::Z: z_mask |= bm; break;
      }
    }
    cx y_phase{1.0, 0.0};
    for (int k = 0; k < (y_count & 3); ++k) y_phase *= cx{0.0, 1.0};
    for (std::uint64_t col = 0; col < dim; ++col) {
      int sign_bits = __builtin_popcountll(col & (y_mask | z_mask));
      cx amp = coeff * y_phase * ((sign_bits & 1) ? -1.0 : 1.0);
      m[(col ^ flip) * dim + col] += amp;
    }
  }
  return m;
}

}  // namespace vps
