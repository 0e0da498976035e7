#pragma once

// Minimal dense helpers for the ridge policy (joint-context dimension is tiny,
// typically 3). Matrices are row-major n x n.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcsel {

inline std::vector<double> identity_matrix(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + i] = 1.0;
  return m;
}

inline void add_outer_product(std::vector<double>& m, std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(i) * n + j] += x[i] * x[j];
}

// Solve A y = b for symmetric positive definite A via Cholesky.
inline std::vector<double> cholesky_solve(std::span<const double> matrix,
                                          std::span<const double> rhs) {
  const int n = static_cast<int>(rhs.size());
  if (matrix.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("cholesky_solve: shape mismatch");
  std::vector<double> chol(matrix.begin(), matrix.end());
  auto at = [&](int i, int j) -> double& { return chol[static_cast<std::size_t>(i) * n + j]; };
  for (int j = 0; j < n; ++j) {
    double d = at(j, j);
    for (int k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
    if (!(d > 0.0)) throw std::invalid_argument("cholesky_solve: matrix not positive definite");
    at(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = at(i, j);
      for (int k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
      at(i, j) = s / at(j, j);
    }
  }
  std::vector<double> y(rhs.begin(), rhs.end());
  for (int i = 0; i < n; ++i) {  // forward: L z = b
    for (int k = 0; k < i; ++k) y[i] -= at(i, k) * y[k];
    y[i] /= at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {  // backward: L^T y = z
    for (int k = i + 1; k < n; ++k) y[i] -= at(k, i) * y[k];
    y[i] /= at(i, i);
  }
  return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace mcsel
