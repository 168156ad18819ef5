#pragma once

#include <cmath>
#include <cstddef>

#include "tdal/encoder.hpp"
#include "tdal/error.hpp"
#include "tdal/linalg.hpp"
#include "tdal/matrix.hpp"

namespace tdal {

/// Principal-component encoder: center, project onto the top out_dim
/// eigenvectors of the sample covariance. Deterministic sign convention:
/// each component's largest-magnitude entry is made positive (ties toward
/// the lowest index).
inline EncoderModel fit_pca(const Matrix& x, std::size_t out_dim) {
  require(out_dim >= 1, "fit_pca: out_dim must be positive");
  require(out_dim <= std::min(x.rows(), x.cols()),
          "fit_pca: out_dim exceeds min(N, d)");

  PcaEncoder enc;
  enc.mean = column_means(x);
  auto eig = symmetric_eigen(sample_covariance(x));
  for (double& v : eig.values)
    if (v < 0.0) v = 0.0;  // degenerate directions clip to zero variance

  enc.components = Matrix(x.cols(), out_dim);
  for (std::size_t j = 0; j < out_dim; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double mag = std::abs(eig.vectors(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double sign = eig.vectors(arg, j) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < x.cols(); ++i)
      enc.components(i, j) = sign * eig.vectors(i, j);
  }
  return EncoderModel::pca(std::move(enc));
}

}  // namespace tdal
