#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace vps {

using cx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Largest register the dense engine accepts (the experiment suite needs 16).
inline constexpr int kMaxQubits = 20;

struct SimError : std::runtime_error {
  explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CapacityError : SimError {
  explicit CapacityError(const std::string& msg) : SimError(msg) {}
};

// Raised when a post-selection branch carries (numerically) zero weight.
// Optimizers treat it as "this trial walked into a dead branch".
struct DegenerateProjectionError : SimError {
  explicit DegenerateProjectionError(const std::string& msg) : SimError(msg) {}
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_number(line) {}
  int line_number;
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_path(field) {}
  std::string field_path;
};

// Qubit 0 is the most significant bit of a basis index.
inline int bit_of(std::uint64_t index, int qubit, int n_qubits) {
  return static_cast<int>((index >> (n_qubits - 1 - qubit)) & 1u);
}

inline std::uint64_t bitmask_of(int qubit, int n_qubits) {
  return std::uint64_t{1} << (n_qubits - 1 - qubit);
}

inline std::string index_to_bitstring(std::uint64_t index, int n_qubits) {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q)
    if (bit_of(index, q, n_qubits)) s[static_cast<std::size_t>(q)] = '1';
  return s;
}

inline int worker_thread_count() {
  if (const char* env = std::getenv("VPS_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// FNV-1a, used for config hashes in run manifests.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace vps
