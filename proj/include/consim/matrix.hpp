#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "consim/errors.hpp"

namespace consim {

/// Small dense row-major matrix. Entries must be finite; construction from
/// data validates this, element writes through operator() do not.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw DimensionMismatch("matrix dimensions must be positive");
    if (!std::isfinite(fill)) throw NonFinite("matrix fill value is not finite");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionMismatch("ragged row in matrix literal");
      std::size_t j = 0;
      for (double v : row) {
        if (!std::isfinite(v)) throw NonFinite("matrix entry is not finite");
        m(i, j++) = v;
      }
      ++i;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
    return s;
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) const {
    Matrix b(h, w);
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw DimensionMismatch("matrix difference shape mismatch");
    Matrix c(a.rows_, a.cols_);
    for (std::size_t i = 0; i < a.data_.size(); ++i) c.data_[i] = a.data_[i] - b.data_[i];
    return c;
  }

  bool equals(const Matrix& other, double tol) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) return false;
    for (std::size_t i = 0; i < data_.size(); ++i)
      if (std::abs(data_[i] - other.data_[i]) > tol) return false;
    return true;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

inline constexpr double kDefaultRankTol = 1e-9;

/// Numerical rank by Gaussian elimination with partial pivoting. A pivot
/// counts iff its magnitude exceeds tol times the largest absolute entry of
/// the input matrix.
inline int rank(const Matrix& m, double tol = kDefaultRankTol) {
  const double scale = m.max_abs();
  if (scale == 0.0) return 0;
  const double threshold = tol * scale;
  Matrix a = m;
  const std::size_t nr = a.rows(), nc = a.cols();
  std::size_t r = 0;
  for (std::size_t col = 0; col < nc && r < nr; ++col) {
    std::size_t piv = r;
    for (std::size_t i = r + 1; i < nr; ++i)
      if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
    if (std::abs(a(piv, col)) <= threshold) continue;
    if (piv != r)
      for (std::size_t j = 0; j < nc; ++j) std::swap(a(piv, j), a(r, j));
    const double inv = 1.0 / a(r, col);
    for (std::size_t i = r + 1; i < nr; ++i) {
      const double f = a(i, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < nc; ++j) a(i, j) -= f * a(r, j);
    }
    ++r;
  }
  return static_cast<int>(r);
}

/// Solves A X = B for square A via LU with partial pivoting.
inline Matrix solve(const Matrix& a_in, const Matrix& b_in) {
  if (a_in.rows() != a_in.cols()) throw DimensionMismatch("solve needs a square matrix");
  if (a_in.rows() != b_in.rows()) throw DimensionMismatch("solve shape mismatch");
  const std::size_t n = a_in.rows(), w = b_in.cols();
  Matrix a = a_in, b = b_in;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
    if (a(piv, col) == 0.0) throw SingularBlock("singular system in solve");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      for (std::size_t j = 0; j < w; ++j) std::swap(b(piv, j), b(col, j));
    }
    const double inv = 1.0 / a(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = a(i, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      for (std::size_t j = 0; j < w; ++j) b(i, j) -= f * b(col, j);
    }
  }
  Matrix x(n, w);
  for (std::size_t jj = 0; jj < w; ++jj) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b(ii, jj);
      for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, jj);
      x(ii, jj) = s / a(ii, ii);
    }
  }
  return x;
}

/// Rank of a block matrix [[A B],[C D]] with nonsingular leading ell x ell
/// block A, computed as ell + rank of the Schur complement D - C A^{-1} B.
inline int block_rank_schur(const Matrix& e, std::size_t ell, double tol = kDefaultRankTol) {
  if (ell < 1 || ell > std::min(e.rows(), e.cols()))
    throw DimensionMismatch("leading block size out of range");
  const Matrix a = e.block(0, 0, ell, ell);
  if (rank(a, tol) != static_cast<int>(ell))
    throw SingularBlock("leading block is singular");
  const std::size_t rh = e.rows() - ell, cw = e.cols() - ell;
  if (rh == 0 || cw == 0) return static_cast<int>(ell);
  const Matrix b = e.block(0, ell, ell, cw);
  const Matrix c = e.block(ell, 0, rh, ell);
  const Matrix d = e.block(ell, ell, rh, cw);
  const Matrix schur = d - c * solve(a, b);
  return static_cast<int>(ell) + rank(schur, tol);
}

}  // namespace consim
