#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/forest.hpp"
#include "tdal/laplace_head.hpp"
#include "tdal/matrix.hpp"

namespace tdal {

/// B x K x C block of per-realisation class probabilities.
struct MemberProbs {
  std::size_t batch = 0;
  std::size_t members = 0;
  std::size_t classes = 0;
  std::vector<double> data;

  MemberProbs() = default;
  MemberProbs(std::size_t b, std::size_t k, std::size_t c)
      : batch(b), members(k), classes(c), data(b * k * c, 0.0) {}

  std::span<double> member_row(std::size_t b, std::size_t k) {
    return {data.data() + (b * members + k) * classes, classes};
  }
  std::span<const double> member_row(std::size_t b, std::size_t k) const {
    return {data.data() + (b * members + k) * classes, classes};
  }

  /// K x C member matrix for one input.
  Matrix member_matrix(std::size_t b) const {
    Matrix m(members, classes);
    for (std::size_t k = 0; k < members; ++k) {
      auto src = member_row(b, k);
      auto dst = m.row(k);
      for (std::size_t c = 0; c < classes; ++c) dst[c] = src[c];
    }
    return m;
  }

  /// Mean over members for one input.
  std::vector<double> marginal(std::size_t b) const {
    std::vector<double> p(classes, 0.0);
    for (std::size_t k = 0; k < members; ++k) {
      auto r = member_row(b, k);
      for (std::size_t c = 0; c < classes; ++c) p[c] += r[c];
    }
    for (double& v : p) v /= static_cast<double>(members);
    return p;
  }
};

/// A fitted stochastic prediction head; its realisations are forest trees or
/// cached Laplace posterior weight samples.
class HeadPosterior {
 public:
  HeadPosterior() = default;
  explicit HeadPosterior(RandomForestHead forest) : impl_(std::move(forest)) {}
  explicit HeadPosterior(LaplaceMlpHead laplace) : impl_(std::move(laplace)) {}

  std::size_t member_count() const {
    if (const auto* f = std::get_if<RandomForestHead>(&impl_)) return f->trees.size();
    return std::get<LaplaceMlpHead>(impl_).members.size();
  }

  std::size_t class_count() const {
    if (const auto* f = std::get_if<RandomForestHead>(&impl_)) return f->class_count;
    return std::get<LaplaceMlpHead>(impl_).class_count;
  }

  std::size_t input_dim() const {
    if (const auto* f = std::get_if<RandomForestHead>(&impl_)) return f->input_dim;
    return std::get<LaplaceMlpHead>(impl_).input_dim;
  }

  const RandomForestHead* as_forest() const { return std::get_if<RandomForestHead>(&impl_); }
  const LaplaceMlpHead* as_laplace() const { return std::get_if<LaplaceMlpHead>(&impl_); }

  /// Per-member class probabilities for each input row. `max_members` caps
  /// how many realisations are used (0 = all), taking the first ones so
  /// scoring stays deterministic.
  MemberProbs predict_members(const Matrix& z, std::size_t max_members = 0) const {
    require_dims(z.cols() == input_dim(), "HeadPosterior::predict_members: dimension mismatch");
    const std::size_t k_all = member_count();
    const std::size_t k = max_members == 0 ? k_all : std::min(max_members, k_all);
    MemberProbs out(z.rows(), k, class_count());

    if (const auto* f = std::get_if<RandomForestHead>(&impl_)) {
      for (std::size_t b = 0; b < z.rows(); ++b) {
        auto x = z.row(b);
        for (std::size_t t = 0; t < k; ++t) {
          auto probs = f->trees[t].predict(x);
          auto dst = out.member_row(b, t);
          for (std::size_t c = 0; c < probs.size(); ++c) dst[c] = probs[c];
        }
      }
      return out;
    }

    const auto& lp = std::get<LaplaceMlpHead>(impl_);
    for (std::size_t m = 0; m < k; ++m) {
      const Matrix probs = lp.members[m](z);
      for (std::size_t b = 0; b < z.rows(); ++b) {
        auto src = probs.row(b);
        auto dst = out.member_row(b, m);
        for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c];
      }
    }
    return out;
  }

  /// Mean-over-members distribution per input row.
  Matrix predict_marginal(const Matrix& z, std::size_t max_members = 0) const {
    const MemberProbs mp = predict_members(z, max_members);
    Matrix out(mp.batch, mp.classes);
    for (std::size_t b = 0; b < mp.batch; ++b) {
      const auto p = mp.marginal(b);
      auto dst = out.row(b);
      for (std::size_t c = 0; c < p.size(); ++c) dst[c] = p[c];
    }
    return out;
  }

 private:
  std::variant<RandomForestHead, LaplaceMlpHead> impl_;
};

}  // namespace tdal
