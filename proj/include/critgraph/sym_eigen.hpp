#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "critgraph/errors.hpp"

// Dense symmetric eigensolver: Householder reduction to tridiagonal form
// followed by implicit-shift QL iteration. Good to near machine precision on
// the desk-scale matrices this library works with (n up to a few thousand).
//
// Two paths:
//   sym_eigen_values  - eigenvalues only; reduction touches just the lower
//                       triangle with fused symmetric products, which is the
//                       hot loop of the exact oracle.
//   sym_eigen_full    - eigenvalues plus orthonormal eigenvectors (classic
//                       tred2/tql2 layout); used where residuals are checked.

namespace critgraph::linalg {

namespace detail {

// QL with implicit shifts on a tridiagonal matrix. d = diagonal,
// e[1..n-1] = subdiagonal. If z is non-null it must hold the n x n
// transformation accumulated so far (row-major); plane rotations are applied
// to its columns so that column j ends up as the eigenvector of d[j].
inline void ql_implicit(std::vector<double>& d, std::vector<double>& e, int n,
                        std::vector<double>* z) {
  if (n <= 1) return;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 50) throw numeric_error("symmetric QL iteration failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
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
            double* zz = z->data();
            for (int k = 0; k < n; ++k) {
              f = zz[static_cast<std::size_t>(k) * n + i + 1];
              zz[static_cast<std::size_t>(k) * n + i + 1] =
                  s * zz[static_cast<std::size_t>(k) * n + i] + c * f;
              zz[static_cast<std::size_t>(k) * n + i] =
                  c * zz[static_cast<std::size_t>(k) * n + i] - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

// Householder reduction, eigenvalues-only variant. Works on the lower
// triangle of the row-major matrix a; d receives the tridiagonal diagonal,
// e the subdiagonal in e[1..n-1].
inline void tridiagonalize_values(std::vector<double>& a, int n, std::vector<double>& d,
                                  std::vector<double>& e) {
  const auto N = static_cast<std::size_t>(n);
  std::vector<double> p(N);
  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double* ui = &a[static_cast<std::size_t>(i) * N];  // Householder vector in row i
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(ui[k]);
      if (scale == 0.0) {
        e[i] = ui[l];
      } else {
        for (int k = 0; k <= l; ++k) {
          ui[k] /= scale;
          h += ui[k] * ui[k];
        }
        double f = ui[l];
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        ui[l] = f - g;
        // p = A u / h over the leading (l+1) block; symmetric product fused
        // into one pass over the lower triangle.
        for (int j = 0; j <= l; ++j) p[j] = a[static_cast<std::size_t>(j) * N + j] * ui[j];
        for (int j = 1; j <= l; ++j) {
          const double* row = &a[static_cast<std::size_t>(j) * N];
          const double uj = ui[j];
          double s = 0.0;
          for (int k = 0; k < j; ++k) {
            s += row[k] * ui[k];
            p[k] += row[k] * uj;
          }
          p[j] += s;
        }
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          p[j] /= h;
          f += p[j] * ui[j];
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) p[j] -= hh * ui[j];  // p is now w
        // A <- A - u w^T - w u^T on the lower triangle.
        for (int j = 0; j <= l; ++j) {
          const double uj = ui[j];
          const double wj = p[j];
          double* row = &a[static_cast<std::size_t>(j) * N];
          for (int k = 0; k <= j; ++k) row[k] -= uj * p[k] + wj * ui[k];
        }
      }
    } else {
      e[i] = ui[l];
    }
  }
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) d[i] = a[static_cast<std::size_t>(i) * N + i];
}

// Householder reduction with accumulation of the orthogonal transform
// (tred2 layout): on return a holds Z with Z^T A Z tridiagonal.
inline void tridiagonalize_vectors(std::vector<double>& a, int n, std::vector<double>& d,
                                   std::vector<double>& e) {
  const auto N = static_cast<std::size_t>(n);
  auto A = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r) * N + c]; };
  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(A(i, k));
      if (scale == 0.0) {
        e[i] = A(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          A(i, k) /= scale;
          h += A(i, k) * A(i, k);
        }
        double f = A(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        A(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          A(j, i) = A(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += A(j, k) * A(i, k);
          for (int k = j + 1; k <= l; ++k) g += A(k, j) * A(i, k);
          e[j] = g / h;
          f += e[j] * A(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = A(i, j);
          g = e[j] - hh * f;
          e[j] = g;
          for (int k = 0; k <= j; ++k) A(j, k) -= f * e[k] + g * A(i, k);
        }
      }
    } else {
      e[i] = A(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += A(i, k) * A(k, j);
        for (int k = 0; k <= l; ++k) A(k, j) -= g * A(k, i);
      }
    }
    d[i] = A(i, i);
    A(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) A(j, i) = A(i, j) = 0.0;
  }
}

}  // namespace detail

/// Eigenvalues of a dense symmetric matrix (row-major, n x n), ascending.
inline std::vector<double> sym_eigen_values(std::vector<double> a, int n) {
  if (n < 0 || a.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw std::invalid_argument("sym_eigen_values: bad matrix size");
  if (n == 0) return {};
  std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n));
  detail::tridiagonalize_values(a, n, d, e);
  detail::ql_implicit(d, e, n, nullptr);
  std::sort(d.begin(), d.end());
  return d;
}

struct SymEigen {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // row-major n x n; column j pairs with values[j]
};

/// Full eigendecomposition of a dense symmetric matrix.
inline SymEigen sym_eigen_full(std::vector<double> a, int n) {
  if (n < 0 || a.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw std::invalid_argument("sym_eigen_full: bad matrix size");
  SymEigen out;
  if (n == 0) return out;
  std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n));
  detail::tridiagonalize_vectors(a, n, d, e);
  detail::ql_implicit(d, e, n, &a);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return d[x] < d[y]; });
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    out.values[static_cast<std::size_t>(j)] = d[order[static_cast<std::size_t>(j)]];
    for (int r = 0; r < n; ++r)
      out.vectors[static_cast<std::size_t>(r) * n + j] =
          a[static_cast<std::size_t>(r) * n + order[static_cast<std::size_t>(j)]];
  }
  return out;
}

}  // namespace critgraph::linalg
