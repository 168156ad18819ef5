#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/matrix.hpp"

namespace tdal {

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // column j pairs with values[j]
};

/// Cyclic Jacobi eigendecomposition for symmetric matrices.
inline EigenDecomposition symmetric_eigen(Matrix a, int max_sweeps = 64) {
  require_dims(a.rows() == a.cols(), "symmetric_eigen: matrix not square");
  const std::size_t n = a.rows();
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-24) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

/// Column means of a data matrix.
inline std::vector<double> column_means(const Matrix& x) {
  std::vector<double> mu(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) mu[j] += r[j];
  }
  const double inv = x.rows() ? 1.0 / static_cast<double>(x.rows()) : 0.0;
  for (double& m : mu) m *= inv;
  return mu;
}

/// Sample covariance (divisor N-1) of row observations.
inline Matrix sample_covariance(const Matrix& x) {
  require(x.rows() >= 2, "sample_covariance: need at least 2 rows");
  const auto mu = column_means(x);
  Matrix cov(x.cols(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t a = 0; a < x.cols(); ++a) {
      const double da = r[a] - mu[a];
      for (std::size_t b = a; b < x.cols(); ++b) cov(a, b) += da * (r[b] - mu[b]);
    }
  }
  const double inv = 1.0 / static_cast<double>(x.rows() - 1);
  for (std::size_t a = 0; a < x.cols(); ++a)
    for (std::size_t b = a; b < x.cols(); ++b) {
      cov(a, b) *= inv;
      cov(b, a) = cov(a, b);
    }
  return cov;
}

}  // namespace tdal
