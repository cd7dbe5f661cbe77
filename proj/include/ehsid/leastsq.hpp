// Dense least squares via Householder QR. Normal equations are avoided on
// purpose: they square the condition number.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ehsid/errors.hpp"

namespace ehsid {

/// Minimal row-major dense matrix.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

struct LeastSquaresSolution {
  std::vector<double> x;
  /// max|r_ii| / min|r_ii| of the triangular factor: a cheap lower bound on
  /// the 2-norm condition number, used as the rank-deficiency guard.
  double condition = 0.0;
};

/// Solve min ||A x - b||_2 for overdetermined A (rows >= cols) by Householder
/// QR with back substitution. A and b are consumed in place.
inline LeastSquaresSolution solve_least_squares(Matrix a, std::vector<double> b) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m) throw DataError("least squares: size mismatch");
  if (m < n) throw DataError("least squares: fewer rows than unknowns");
  if (n == 0) throw DataError("least squares: no unknowns");

  std::vector<double> v(m);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < m; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      a(j, j) = 0.0;  // dead column; condition estimate reports it
      continue;
    }
    const double alpha = a(j, j) >= 0.0 ? -norm : norm;
    double vnorm2 = 0.0;
    for (std::size_t i = j; i < m; ++i) {
      v[i] = a(i, j);
      if (i == j) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 > 0.0) {
      // apply H = I - 2 v v^T / (v^T v) to the trailing columns and to b
      for (std::size_t k = j; k < n; ++k) {
        double dot = 0.0;
        for (std::size_t i = j; i < m; ++i) dot += v[i] * a(i, k);
        const double scale = 2.0 * dot / vnorm2;
        for (std::size_t i = j; i < m; ++i) a(i, k) -= scale * v[i];
      }
      double dot = 0.0;
      for (std::size_t i = j; i < m; ++i) dot += v[i] * b[i];
      const double scale = 2.0 * dot / vnorm2;
      for (std::size_t i = j; i < m; ++i) b[i] -= scale * v[i];
    }
    a(j, j) = alpha;
  }

  double diag_max = 0.0;
  double diag_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double d = std::abs(a(j, j));
    diag_max = std::max(diag_max, d);
    diag_min = std::min(diag_min, d);
  }

  LeastSquaresSolution sol;
  sol.condition = (diag_min == 0.0) ? std::numeric_limits<double>::infinity()
                                    : diag_max / diag_min;
  sol.x.assign(n, 0.0);
  if (!std::isfinite(sol.condition)) return sol;  // caller decides how to fail

  for (std::size_t jj = n; jj-- > 0;) {
    double s = b[jj];
    for (std::size_t k = jj + 1; k < n; ++k) s -= a(jj, k) * sol.x[k];
    sol.x[jj] = s / a(jj, jj);
  }
  return sol;
}

}  // namespace ehsid
