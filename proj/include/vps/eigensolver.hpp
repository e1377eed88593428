#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vps/common.hpp"
#include "vps/pauli.hpp"

namespace vps {

struct EigenDecomposition {
  std::vector<double> eigenvalues;   // ascending
  std::vector<cx> eigenvectors;      // row-major, column k is eigenvector k; empty if not requested
  std::size_t dim = 0;

  cx vector_entry(std::size_t row, std::size_t k) const { return eigenvectors[row * dim + k]; }
};

namespace detail {

inline constexpr std::size_t kEighMaxDim = 4096;

// Implicit-shift QL sweeps on a real symmetric tridiagonal (d, e with
// e[i] the subdiagonal below d[i-1]... stored as e[1..n-1]). Rotations are
// optionally accumulated into the complex matrix z (row-major, n x n).
inline void tql_implicit(std::vector<double>& d, std::vector<double>& e, std::vector<cx>* z,
                         std::size_t n) {
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  // norm-scaled floor keeps the deflation test reachable inside clusters of
  // (near-)zero eigenvalues, where the relative test alone stalls
  double anorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]));
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= eps * anorm) break;
      }
      if (m != l) {
        if (iter++ == 100) throw SimError("tql: too many QL iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z) {
            for (std::size_t k = 0; k < n; ++k) {
              cx zk1 = (*z)[k * n + i + 1];
              cx zk0 = (*z)[k * n + i];
              (*z)[k * n + i + 1] = s * zk0 + c * zk1;
              (*z)[k * n + i] = c * zk0 - s * zk1;
            }
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

inline void sort_ascending(std::vector<double>& d, std::vector<cx>* z, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  std::vector<double> d2(n);
  for (std::size_t k = 0; k < n; ++k) d2[k] = d[order[k]];
  d = std::move(d2);
  if (z) {
    std::vector<cx> z2(n * n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < n; ++k) z2[r * n + k] = (*z)[r * n + order[k]];
    *z = std::move(z2);
  }
}

// Unblocked real-symmetric Householder reduction with transform
// accumulation (classic tred2 recurrence). a is n x n row-major; on exit
// it holds the orthogonal Q with Q^T A Q tridiagonal.
inline void tred2_real(std::vector<double>& a, std::size_t n, std::vector<double>& d,
                       std::vector<double>& e) {
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = n; i-- > 1;) {
    std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(a[i * n + k]);
      if (scale == 0.0) {
        e[i] = a[i * n + l];
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          a[i * n + k] /= scale;
          h += a[i * n + k] * a[i * n + k];
        }
        double f = a[i * n + l];
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a[i * n + l] = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          a[j * n + i] = a[i * n + j] / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
          for (std::size_t k = j + 1; k <= l; ++k) g += a[k * n + j] * a[i * n + k];
          e[j] = g / h;
          f += e[j] * a[i * n + j];
        }
        double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = a[i * n + j];
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k) a[j * n + k] -= f * e[k] + g * a[i * n + k];
        }
      }
    } else {
      e[i] = a[i * n + l];
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += a[i * n + k] * a[k * n + j];
        for (std::size_t k = 0; k < i; ++k) a[k * n + j] -= g * a[k * n + i];
      }
    }
    d[i] = a[i * n + i];
    a[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) a[j * n + i] = a[i * n + j] = 0.0;
  }
}

// Blocked eigenvalues-only reduction. Only the lower triangle of a is
// referenced or updated. Panels of width nb defer the trailing rank-2
// corrections so the hot loops stream contiguous rows.
inline void tred_blocked_novec(std::vector<double>& a, std::size_t n, std::vector<double>& d,
                               std::vector<double>& e, std::size_t nb = 32) {
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  if (n < 3) {
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i * n + i];
    if (n == 2) e[1] = a[1 * n + 0];
    return;
  }
  std::vector<double> U(n * nb, 0.0), W(n * nb, 0.0), v(n, 0.0), p(n, 0.0);
  for (std::size_t k = 0; k < n - 2;) {
    const std::size_t b = std::min(nb, n - 2 - k);
    for (std::size_t jj = 0; jj < b; ++jj) {
      const std::size_t j = k + jj;
      // pull column j (rows j..n-1), applying the panel's pending updates
      for (std::size_t i = j; i < n; ++i) {
        double x = a[i * n + j];
        const double* Ui = &U[i * nb];
        const double* Wi = &W[i * nb];
        const double* Uj = &U[j * nb];
        const double* Wj = &W[j * nb];
        for (std::size_t t = 0; t < jj; ++t) x -= Ui[t] * Wj[t] + Wi[t] * Uj[t];
        v[i] = x;
        (void)Uj;
      }
      d[j] = v[j];
      a[j * n + j] = v[j];  // keep diagonal current for the tail block
      // Householder on rows j+1..n-1
      double scale = 0.0;
      for (std::size_t i = j + 1; i < n; ++i) scale += std::abs(v[i]);
      if (scale == 0.0) {
        e[j + 1] = 0.0;
        for (std::size_t i = 0; i < n; ++i) U[i * nb + jj] = W[i * nb + jj] = 0.0;
        continue;
      }
      double h = 0.0;
      for (std::size_t i = j + 1; i < n; ++i) {
        v[i] /= scale;
        h += v[i] * v[i];
      }
      double f = v[j + 1];
      double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
      e[j + 1] = scale * g;
      h -= f * g;  // = |u|^2 / 2
      v[j + 1] = f - g;
      for (std::size_t i = 0; i <= j; ++i) v[i] = 0.0;
      const double tau = 1.0 / h;  // 2 / |u|^2
      // p = A_eff * u (times tau below) using the stale lower triangle.
      // Per-thread partials merge in thread-id order so reruns are
      // bit-identical; small trailing blocks stay serial.
      for (std::size_t i = j + 1; i < n; ++i) p[i] = 0.0;
#ifdef _OPENMP
      if (n - j > 512) {
        const int nt = omp_get_max_threads();
        std::vector<std::vector<double>> partials(static_cast<std::size_t>(nt));
#pragma omp parallel num_threads(nt)
        {
          std::vector<double>& local = partials[static_cast<std::size_t>(omp_get_thread_num())];
          local.assign(n, 0.0);
#pragma omp for schedule(static)
          for (std::size_t i = j + 1; i < n; ++i) {
            const double* row = &a[i * n];
            const double vi = v[i];
            double s = row[i] * vi;
            for (std::size_t c = j + 1; c < i; ++c) {
              s += row[c] * v[c];
              local[c] += row[c] * vi;
            }
            local[i] += s;
          }
        }
        for (const auto& local : partials) {
          if (local.empty()) continue;
          for (std::size_t i = j + 1; i < n; ++i) p[i] += local[i];
        }
      } else
#endif
      {
        for (std::size_t i = j + 1; i < n; ++i) {
          const double* row = &a[i * n];
          const double vi = v[i];
          double s = row[i] * vi;
          for (std::size_t c = j + 1; c < i; ++c) {
            s += row[c] * v[c];
            p[c] += row[c] * vi;
          }
          p[i] += s;
        }
      }
      // corrections from the panel so far: p -= U (W^T u) + W (U^T u)
      if (jj > 0) {
        std::vector<double> s2(jj, 0.0), s3(jj, 0.0);
        for (std::size_t i = j + 1; i < n; ++i) {
          const double vi = v[i];
          const double* Ui = &U[i * nb];
          const double* Wi = &W[i * nb];
          for (std::size_t t = 0; t < jj; ++t) {
            s2[t] += Ui[t] * vi;
            s3[t] += Wi[t] * vi;
          }
        }
        for (std::size_t i = j + 1; i < n; ++i) {
          double corr = 0.0;
          const double* Ui = &U[i * nb];
          const double* Wi = &W[i * nb];
          for (std::size_t t = 0; t < jj; ++t) corr += Ui[t] * s3[t] + Wi[t] * s2[t];
          p[i] -= corr;
        }
      }
      for (std::size_t i = j + 1; i < n; ++i) p[i] *= tau;
      double K = 0.0;
      for (std::size_t i = j + 1; i < n; ++i) K += v[i] * p[i];
      K *= tau / 2.0;
      for (std::size_t i = 0; i < n; ++i) {
        U[i * nb + jj] = v[i];
        W[i * nb + jj] = (i > j) ? p[i] - K * v[i] : 0.0;
      }
    }
    // trailing update: lower triangle of A(k+b.., k+b..) -= U W^T + W U^T
    // (each row is written by exactly one thread, so scheduling cannot
    // change the arithmetic)
    const std::size_t s0 = k + b;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) if (n - s0 > 256)
#endif
    for (std::size_t i = s0; i < n; ++i) {
      double* row = &a[i * n];
      const double* Ui = &U[i * nb];
      const double* Wi = &W[i * nb];
      for (std::size_t c = s0; c <= i; ++c) {
        const double* Uc = &U[c * nb];
        const double* Wc = &W[c * nb];
        double acc = 0.0;
        for (std::size_t t = 0; t < b; ++t) acc += Ui[t] * Wc[t] + Wi[t] * Uc[t];
        row[c] -= acc;
      }
    }
    k += b;
  }
  d[n - 2] = a[(n - 2) * n + (n - 2)];
  d[n - 1] = a[(n - 1) * n + (n - 1)];
  e[n - 1] = a[(n - 1) * n + (n - 2)];
}

// Complex Hermitian Householder reduction to real tridiagonal with unitary
// accumulation. Unblocked; used for the modest dimensions the oracles need.
inline void tred_complex(std::vector<cx>& a, std::size_t n, std::vector<double>& d,
                         std::vector<double>& e, std::vector<cx>* q) {
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  std::vector<cx> sub(n, cx{0, 0});  // complex subdiagonal before dephasing
  std::vector<std::vector<cx>> reflectors;
  std::vector<double> taus;
  if (q) {
    reflectors.reserve(n);
    taus.reserve(n);
  }
  std::vector<cx> u(n), p(n);
  for (std::size_t kcol = 0; kcol + 2 < n; ++kcol) {
    double xnorm2 = 0.0;
    for (std::size_t i = kcol + 1; i < n; ++i) xnorm2 += std::norm(a[i * n + kcol]);
    cx x0 = a[(kcol + 1) * n + kcol];
    double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) {
      sub[kcol + 1] = cx{0, 0};
      if (q) {
        reflectors.emplace_back();
        taus.push_back(0.0);
      }
      continue;
    }
    cx phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : cx{1, 0};
    cx alpha = -phase * xnorm;
    double un2 = 0.0;
    for (std::size_t i = kcol + 1; i < n; ++i) {
      u[i] = a[i * n + kcol];
      if (i == kcol + 1) u[i] -= alpha;
      un2 += std::norm(u[i]);
    }
    if (un2 < 1e-300) {
      sub[kcol + 1] = alpha;
      if (q) {
        reflectors.emplace_back();
        taus.push_back(0.0);
      }
      continue;
    }
    const double tau = 2.0 / un2;
    // p = tau * A u on the trailing block
    for (std::size_t i = kcol + 1; i < n; ++i) {
      cx s{0, 0};
      for (std::size_t c = kcol + 1; c < n; ++c) s += a[i * n + c] * u[c];
      p[i] = tau * s;
    }
    cx up{0, 0};
    for (std::size_t i = kcol + 1; i < n; ++i) up += std::conj(u[i]) * p[i];
    const double K = 0.5 * tau * up.real();
    for (std::size_t i = kcol + 1; i < n; ++i) p[i] -= K * u[i];
    for (std::size_t i = kcol + 1; i < n; ++i)
      for (std::size_t c = kcol + 1; c < n; ++c)
        a[i * n + c] -= u[i] * std::conj(p[c]) + p[i] * std::conj(u[c]);
    sub[kcol + 1] = alpha;
    if (q) {
      reflectors.emplace_back(u.begin() + static_cast<std::ptrdiff_t>(kcol + 1), u.begin() + static_cast<std::ptrdiff_t>(n));
      taus.push_back(tau);
    }
  }
  if (n >= 2) sub[n - 1] = a[(n - 1) * n + (n - 2)];
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i * n + i].real();

  // dephase the subdiagonal: D = diag(ph_i) with T' = D^dag T D real
  std::vector<cx> ph(n, cx{1, 0});
  for (std::size_t i = 1; i < n; ++i) {
    double mag = std::abs(sub[i]);
    e[i] = mag;
    cx rot = (mag > 0.0) ? sub[i] / mag : cx{1, 0};
    ph[i] = ph[i - 1] * rot;
  }
  if (q) {
    // Q = H_0 H_1 ... H_{n-3} D
    std::vector<cx>& Q = *q;
    Q.assign(n * n, cx{0, 0});
    for (std::size_t i = 0; i < n; ++i) Q[i * n + i] = ph[i];
    for (std::size_t kcol = reflectors.size(); kcol-- > 0;) {
      const auto& uref = reflectors[kcol];
      if (uref.empty()) continue;
      const double tau = taus[kcol];
      const std::size_t base = kcol + 1;
      for (std::size_t col = 0; col < n; ++col) {
        cx dot{0, 0};
        for (std::size_t i = 0; i < uref.size(); ++i)
          dot += std::conj(uref[i]) * Q[(base + i) * n + col];
        dot *= tau;
        for (std::size_t i = 0; i < uref.size(); ++i) Q[(base + i) * n + col] -= uref[i] * dot;
      }
    }
  }
}

}  // namespace detail

// Dense Hermitian eigendecomposition (Householder reduction + implicit QL).
// Input is row-major n x n; Hermiticity is checked, capacity capped at 4096.
inline EigenDecomposition eigh(const std::vector<cx>& mat, std::size_t n,
                               bool with_vectors = true) {
  if (mat.size() != n * n) throw std::invalid_argument("eigh: matrix size mismatch");
  if (n == 0) throw std::invalid_argument("eigh: empty matrix");
  if (n > detail::kEighMaxDim)
    throw CapacityError("eigh: dimension " + std::to_string(n) + " exceeds cap " +
                        std::to_string(detail::kEighMaxDim));
  double scale = 0.0;
  for (const cx& v : mat) scale = std::max(scale, std::abs(v));
  double herm_defect = 0.0;
  bool is_real = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      herm_defect = std::max(herm_defect, std::abs(mat[i * n + j] - std::conj(mat[j * n + i])));
      if (mat[i * n + j].imag() != 0.0 || mat[j * n + i].imag() != 0.0) is_real = false;
    }
  if (herm_defect > 1e-8 * std::max(1.0, scale))
    throw std::invalid_argument("eigh: input is not Hermitian (defect " +
                                std::to_string(herm_defect) + ")");

  EigenDecomposition out;
  out.dim = n;
  std::vector<double> d, e;
  if (is_real) {
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a[i * n + j] = 0.5 * (mat[i * n + j].real() + mat[j * n + i].real());
    if (with_vectors) {
      detail::tred2_real(a, n, d, e);
      std::vector<cx> z(n * n);
      for (std::size_t k = 0; k < n * n; ++k) z[k] = cx{a[k], 0.0};
      detail::tql_implicit(d, e, &z, n);
      detail::sort_ascending(d, &z, n);
      out.eigenvectors = std::move(z);
    } else {
      detail::tred_blocked_novec(a, n, d, e);
      detail::tql_implicit(d, e, nullptr, n);
      detail::sort_ascending(d, nullptr, n);
    }
  } else {
    std::vector<cx> a(mat);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        cx sym = 0.5 * (mat[i * n + j] + std::conj(mat[j * n + i]));
        a[i * n + j] = sym;
      }
    std::vector<cx> q;
    detail::tred_complex(a, n, d, e, with_vectors ? &q : nullptr);
    detail::tql_implicit(d, e, with_vectors ? &q : nullptr, n);
    detail::sort_ascending(d, with_vectors ? &q : nullptr, n);
    if (with_vectors) out.eigenvectors = std::move(q);
  }
  out.eigenvalues = std::move(d);
  return out;
}

// Minimum eigenvalue of the dense Hamiltonian. Dense build capped at 12
// qubits, which covers every lattice in the experiment suite.
inline double ground_energy(const PauliSum& h) {
  auto m = dense_matrix(h, 12);
  auto dec = eigh(m, std::uint64_t{1} << h.n_qubits, /*with_vectors=*/false);
  return dec.eigenvalues.front();
}

}  // namespace vps
