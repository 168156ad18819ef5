#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/matrix.hpp"

namespace tdal {

/// Shannon entropy in nats, with 0 ln 0 = 0.
inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v < 0.0) throw value_error("entropy: negative probability");
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

/// Mutual information between the prediction and the realisation index:
/// H(mean over members) minus mean member entropy. `members` is K x C.
inline double bald(const Matrix& members) {
  require(members.rows() >= 1 && members.cols() >= 1, "bald: empty member matrix");
  const std::size_t k_count = members.rows();
  const std::size_t classes = members.cols();
  std::vector<double> marginal(classes, 0.0);
  double mean_h = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    auto row = members.row(k);
    mean_h += entropy(row);
    for (std::size_t c = 0; c < classes; ++c) marginal[c] += row[c];
  }
  mean_h /= static_cast<double>(k_count);
  for (double& v : marginal) v /= static_cast<double>(k_count);
  return entropy(marginal) - mean_h;
}

namespace detail {

/// MI of the joint J[y, y*] = (1/K) sum_k P[k,y] Q[k,y*] against its own
/// marginals; terms with J = 0 contribute 0.
inline double epig_pair(std::span<const double> p_flat, std::span<const double> q_flat,
                        std::size_t k_count, std::size_t classes) {
  std::vector<double> joint(classes * classes, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double* pk = p_flat.data() + k * classes;
    const double* qk = q_flat.data() + k * classes;
    for (std::size_t y = 0; y < classes; ++y) {
      const double py = pk[y];
      if (py == 0.0) continue;
      double* jr = joint.data() + y * classes;
      for (std::size_t ys = 0; ys < classes; ++ys) jr[ys] += py * qk[ys];
    }
  }
  const double inv_k = 1.0 / static_cast<double>(k_count);
  for (double& v : joint) v *= inv_k;

  std::vector<double> py(classes, 0.0), qy(classes, 0.0);
  for (std::size_t y = 0; y < classes; ++y)
    for (std::size_t ys = 0; ys < classes; ++ys) {
      py[y] += joint[y * classes + ys];
      qy[ys] += joint[y * classes + ys];
    }

  double mi = 0.0;
  for (std::size_t y = 0; y < classes; ++y)
    for (std::size_t ys = 0; ys < classes; ++ys) {
      const double j = joint[y * classes + ys];
      if (j > 0.0) mi += j * std::log(j / (py[y] * qy[ys]));
    }
  return mi;
}

}  // namespace detail

/// Expected predictive information gain of a candidate against target-input
/// member predictions, estimated as the mean over targets of the mutual
/// information between the candidate label and the target prediction under
/// shared head realisations.
inline double epig(const Matrix& candidate_members, std::span<const Matrix> target_members) {
  require(!target_members.empty(), "epig: no target members");
  const std::size_t k_count = candidate_members.rows();
  const std::size_t classes = candidate_members.cols();
  double total = 0.0;
  for (const Matrix& q : target_members) {
    require_dims(q.rows() == k_count, "epig: realisation count mismatch");
    require_dims(q.cols() == classes, "epig: class count mismatch");
    total += detail::epig_pair({candidate_members.data(), candidate_members.size()},
                               {q.data(), q.size()}, k_count, classes);
  }
  return total / static_cast<double>(target_members.size());
}

/// Least-confidence score: 1 minus the top marginal class probability.
inline double confidence_score(const Matrix& members) {
  require(members.rows() >= 1 && members.cols() >= 1, "confidence_score: empty member matrix");
  double best = 0.0;
  for (std::size_t c = 0; c < members.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t k = 0; k < members.rows(); ++k) mean += members(k, c);
    best = std::max(best, mean / static_cast<double>(members.rows()));
  }
  return 1.0 - best;
}

}  // namespace tdal
