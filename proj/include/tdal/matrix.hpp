#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdal/error.hpp"

namespace tdal {

/// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix of(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
      require_dims(r.size() == m.cols_, "Matrix::of: ragged rows");
      std::size_t j = 0;
      for (double v : r) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  static Matrix row_vector(std::span<const double> v) {
    Matrix m(1, v.size());
    for (std::size_t j = 0; j < v.size(); ++j) m.data_[j] = v[j];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Copy of the column range [begin, end).
  Matrix columns(std::size_t begin, std::size_t end) const {
    require_dims(begin <= end && end <= cols_, "Matrix::columns: bad range");
    Matrix out(rows_, end - begin);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = (*this)(i, j);
    return out;
  }

  Matrix rows_at(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      require_dims(idx[i] < rows_, "Matrix::rows_at: index out of range");
      auto src = row(idx[i]);
      auto dst = out.row(i);
      for (std::size_t j = 0; j < cols_; ++j) dst[j] = src[j];
    }
    return out;
  }

  Matrix& operator+=(const Matrix& o) {
    require_dims(same_shape(o), "Matrix::+=: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }

  Matrix& operator-=(const Matrix& o) {
    require_dims(same_shape(o), "Matrix::-=: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }

  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(Matrix a, double s) { return a *= s; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

/// a (n x k) times b (k x m).
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  require_dims(a.cols() == b.rows(), "matmul: inner dimensions differ (" +
                                         std::to_string(a.cols()) + " vs " +
                                         std::to_string(b.rows()) + ")");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.data() + i * c.cols();
    const double* ai = a.data() + i * a.cols();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.data() + k * b.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

/// a^T (k x n -> n x k) times b (k x m); avoids materializing the transpose.
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require_dims(a.rows() == b.rows(), "matmul_tn: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.data() + k * a.cols();
    const double* bk = b.data() + k * b.cols();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.data() + i * c.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

/// a (n x k) times b^T (m x k -> k x m).
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require_dims(a.cols() == b.cols(), "matmul_nt: col counts differ");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.data() + i * a.cols();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.data() + j * b.cols();
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  return c;
}

inline Matrix hconcat(const Matrix& a, const Matrix& b) {
  require_dims(a.rows() == b.rows(), "hconcat: row counts differ");
  Matrix c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ra = a.row(i);
    auto rb = b.row(i);
    auto rc = c.row(i);
    for (std::size_t j = 0; j < ra.size(); ++j) rc[j] = ra[j];
    for (std::size_t j = 0; j < rb.size(); ++j) rc[a.cols() + j] = rb[j];
  }
  return c;
}

inline Matrix hadamard(Matrix a, const Matrix& b) {
  require_dims(a.same_shape(b), "hadamard: shape mismatch");
  for (std::size_t k = 0; k < a.size(); ++k) a.data()[k] *= b.data()[k];
  return a;
}

inline void ensure_finite(const Matrix& m, const std::string& what) {
  if (!m.all_finite()) throw numeric_error(what + ": non-finite entries");
}

}  // namespace tdal
