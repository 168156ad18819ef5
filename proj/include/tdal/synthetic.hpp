#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tdal/dataset.hpp"
#include "tdal/error.hpp"
#include "tdal/rng.hpp"

namespace tdal {

/// Gaussian-cluster generator for messy pools. Target classes differ only in
/// the first `task_dims` coordinates; the remaining `nuisance_dims`
/// coordinates carry variance nuisance_scale^2 in every class, and redundant
/// classes differ only there. With nuisance_scale > 1 the bulk of the pool
/// variance is task-irrelevant, which is what starves variance-greedy
/// unsupervised encoders of task information.
struct SyntheticConfig {
  int target_classes = 3;
  int redundant_classes = 7;
  int task_dims = 3;
  int nuisance_dims = 7;
  double nuisance_scale = 3.0;
  double separation = 4.0;  // distance of target-class means from the origin
  int per_class = 400;

  bool operator==(const SyntheticConfig&) const = default;
};

namespace detail {

// Distinct unit directions: +e_0..+e_{d-1}, then -e_0..-e_{d-1}, then random.
inline std::vector<double> mean_direction(int index, int dims, Rng& overflow_rng) {
  std::vector<double> u(dims, 0.0);
  if (dims == 0) return u;
  if (index < dims) {
    u[index] = 1.0;
  } else if (index < 2 * dims) {
    u[index - dims] = -1.0;
  } else {
    double norm = 0.0;
    for (double& v : u) {
      v = overflow_rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm > 0 ? norm : 1.0;
  }
  return u;
}

}  // namespace detail

inline std::pair<Dataset, TaskSpec> make_synthetic_messy(const SyntheticConfig& cfg,
                                                         std::uint64_t seed) {
  require(cfg.target_classes >= 2, "make_synthetic_messy: need at least 2 target classes");
  require(cfg.task_dims >= 1, "make_synthetic_messy: need at least 1 task dim");
  require(cfg.redundant_classes >= 0, "make_synthetic_messy: negative redundant class count");
  require(cfg.nuisance_dims >= 0, "make_synthetic_messy: negative nuisance dim count");
  require(cfg.nuisance_scale >= 0.0, "make_synthetic_messy: negative nuisance scale");
  require(cfg.per_class >= 1, "make_synthetic_messy: per_class must be positive");

  const int t = cfg.target_classes;
  const int r = cfg.redundant_classes;
  const int d = cfg.task_dims + cfg.nuisance_dims;
  const int classes = t + r;

  Rng root(seed);
  Rng dir_rng = root.stream("mean-directions");

  // class means: targets spread in task dims, redundant classes in nuisance dims
  std::vector<std::vector<double>> means(classes, std::vector<double>(d, 0.0));
  for (int c = 0; c < t; ++c) {
    const auto u = detail::mean_direction(c, cfg.task_dims, dir_rng);
    for (int j = 0; j < cfg.task_dims; ++j) means[c][j] = cfg.separation * u[j];
  }
  for (int c = 0; c < r; ++c) {
    const auto u = detail::mean_direction(c, cfg.nuisance_dims, dir_rng);
    for (int j = 0; j < cfg.nuisance_dims; ++j)
      means[t + c][cfg.task_dims + j] = cfg.nuisance_scale * u[j];
  }

  Dataset ds;
  ds.features = Matrix(static_cast<std::size_t>(classes) * cfg.per_class, d);
  ds.labels.resize(ds.features.rows());
  std::size_t row = 0;
  for (int c = 0; c < classes; ++c) {
    Rng cls = root.stream("class", static_cast<std::uint64_t>(c));
    for (int i = 0; i < cfg.per_class; ++i, ++row) {
      auto x = ds.features.row(row);
      for (int j = 0; j < cfg.task_dims; ++j) x[j] = means[c][j] + cls.normal();
      for (int j = cfg.task_dims; j < d; ++j)
        x[j] = means[c][j] + cfg.nuisance_scale * cls.normal();
      ds.labels[row] = c;
    }
  }

  TaskSpec task;
  for (int c = 0; c < t; ++c) task.target_classes.push_back(c);
  return {std::move(ds), task};
}

}  // namespace tdal
