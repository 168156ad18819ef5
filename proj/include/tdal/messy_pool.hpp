#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tdal/dataset.hpp"
#include "tdal/error.hpp"
#include "tdal/idx_loader.hpp"
#include "tdal/rng.hpp"

namespace tdal {

struct MessyPoolConfig {
  double imbalance_ratio = 10.0;  // redundant-class count over target-class count
  double redundant_ratio = 0.0;   // informational; (0,1] when set, 0 = unset
  std::size_t pool_size = 2000;
  std::size_t test_size = 400;
  std::size_t target_sample_size = 300;  // M_pool, the EPIG target set
  std::uint64_t seed = 0;

  void validate() const {
    require(imbalance_ratio >= 1.0, "MessyPoolConfig: imbalance_ratio must be >= 1");
    require(redundant_ratio == 0.0 || (redundant_ratio > 0.0 && redundant_ratio <= 1.0),
            "MessyPoolConfig: redundant_ratio must lie in (0,1]");
    require(pool_size >= 1, "MessyPoolConfig: pool_size must be positive");
    require(test_size >= 1, "MessyPoolConfig: test_size must be positive");
    require(target_sample_size >= 1, "MessyPoolConfig: target_sample_size must be positive");
  }

  bool operator==(const MessyPoolConfig&) const = default;
};

/// The splits one experiment runs on. Pool and test labels are task labels
/// (targets keep their position in TaskSpec, everything else is collapsed
/// into the redundant category). Source-row bookkeeping is kept so
/// disjointness stays checkable.
struct PoolSplits {
  Dataset pool;
  Dataset test;
  Matrix target_samples;                       // stands in for the target input distribution
  std::vector<std::size_t> initial_labeled;    // filled by sample_initial_labeled
  TaskSpec task;

  std::vector<std::size_t> pool_source_rows;
  std::vector<std::size_t> test_source_rows;
  std::vector<std::size_t> target_sample_source_rows;
};

namespace detail {

// Largest q with r*q + t*floor(q/ir) <= pool_size.
inline std::size_t solve_redundant_quota(std::size_t pool_size, std::size_t r, std::size_t t,
                                         double ir) {
  std::size_t lo = 0, hi = pool_size;
  auto used = [&](std::size_t q) {
    return r * q + t * static_cast<std::size_t>(std::floor(static_cast<double>(q) / ir));
  };
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (used(mid) <= pool_size)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

}  // namespace detail

inline PoolSplits build_messy_pool(const Dataset& base, const TaskSpec& task,
                                   const MessyPoolConfig& cfg) {
  base.validate();
  cfg.validate();
  const int raw_classes = base.class_count();
  task.validate(raw_classes);

  std::vector<std::size_t> class_counts(raw_classes, 0);
  for (int y : base.labels) ++class_counts[y];

  std::vector<int> redundant_raw;
  for (int c = 0; c < raw_classes; ++c) {
    if (class_counts[c] == 0) continue;
    if (task.task_label(c) == task.redundant_class_index()) redundant_raw.push_back(c);
  }
  for (int c : task.target_classes)
    require(class_counts[c] > 0, "build_messy_pool: target class " + std::to_string(c) +
                                     " has no examples");

  const std::size_t t = task.target_classes.size();
  const std::size_t r = redundant_raw.size();

  // per-raw-class pool quotas
  std::vector<std::size_t> pool_quota(raw_classes, 0);
  if (r == 0) {
    const std::size_t each = cfg.pool_size / t;
    std::size_t rem = cfg.pool_size - each * t;
    for (int c : task.target_classes) pool_quota[c] = each;
    for (std::size_t i = 0; rem > 0; i = (i + 1) % t, --rem) ++pool_quota[task.target_classes[i]];
  } else {
    const std::size_t q = detail::solve_redundant_quota(cfg.pool_size, r, t, cfg.imbalance_ratio);
    const std::size_t target_q =
        static_cast<std::size_t>(std::floor(static_cast<double>(q) / cfg.imbalance_ratio));
    require(q >= 1 && target_q >= 1,
            "build_messy_pool: quota underflow (pool too small for the imbalance ratio)");
    for (int c : redundant_raw) pool_quota[c] = q;
    for (int c : task.target_classes) pool_quota[c] = target_q;
    std::size_t rem = cfg.pool_size - (r * q + t * target_q);
    for (std::size_t i = 0; rem > 0; i = (i + 1) % r, --rem) ++pool_quota[redundant_raw[i]];
  }

  // test quotas, balanced over the task classes that exist
  const std::size_t task_classes_present = t + (r > 0 ? 1 : 0);
  const std::size_t test_each = cfg.test_size / task_classes_present;
  std::size_t test_rem = cfg.test_size - test_each * task_classes_present;
  std::vector<std::size_t> test_quota_task(task.task_class_count(), 0);
  for (std::size_t i = 0; i < task_classes_present; ++i) {
    test_quota_task[i] = test_each + (i < test_rem ? 1 : 0);
  }
  std::vector<std::size_t> test_quota(raw_classes, 0);
  for (std::size_t i = 0; i < t; ++i) test_quota[task.target_classes[i]] = test_quota_task[i];
  if (r > 0) {
    std::size_t red_test = test_quota_task[t];
    for (std::size_t i = 0; red_test > 0; i = (i + 1) % r, --red_test)
      ++test_quota[redundant_raw[i]];
  }

  for (int c = 0; c < raw_classes; ++c) {
    const std::size_t need = pool_quota[c] + test_quota[c];
    require(class_counts[c] >= need,
            "build_messy_pool: class " + std::to_string(c) + " has " +
                std::to_string(class_counts[c]) + " examples, needs " + std::to_string(need));
  }

  // deterministic per-class order, then allocate pool / test / held-out
  Rng root(cfg.seed);
  std::vector<std::vector<std::size_t>> by_class(raw_classes);
  for (std::size_t i = 0; i < base.size(); ++i) by_class[base.labels[i]].push_back(i);
  for (int c = 0; c < raw_classes; ++c) {
    Rng order = root.stream("class-order", static_cast<std::uint64_t>(c));
    order.shuffle(by_class[c]);
  }

  std::vector<std::size_t> pool_rows, test_rows, heldout_target_rows;
  for (int c = 0; c < raw_classes; ++c) {
    const auto& rows = by_class[c];
    std::size_t k = 0;
    for (std::size_t i = 0; i < pool_quota[c]; ++i) pool_rows.push_back(rows[k++]);
    for (std::size_t i = 0; i < test_quota[c]; ++i) test_rows.push_back(rows[k++]);
    if (task.task_label(c) != task.redundant_class_index())
      for (; k < rows.size(); ++k) heldout_target_rows.push_back(rows[k]);
  }

  require(heldout_target_rows.size() >= cfg.target_sample_size,
          "build_messy_pool: only " + std::to_string(heldout_target_rows.size()) +
              " held-out target examples for " + std::to_string(cfg.target_sample_size) +
              " target samples");
  Rng ts_rng = root.stream("target-samples");
  const auto picks =
      ts_rng.sample_without_replacement(heldout_target_rows.size(), cfg.target_sample_size);
  std::vector<std::size_t> target_rows;
  target_rows.reserve(picks.size());
  for (std::size_t p : picks) target_rows.push_back(heldout_target_rows[p]);

  Rng pool_order = root.stream("pool-order");
  pool_order.shuffle(pool_rows);

  PoolSplits out;
  out.task = task;
  out.pool.features = base.features.rows_at(pool_rows);
  out.pool.labels.reserve(pool_rows.size());
  for (std::size_t i : pool_rows) out.pool.labels.push_back(task.task_label(base.labels[i]));
  out.test.features = base.features.rows_at(test_rows);
  out.test.labels.reserve(test_rows.size());
  for (std::size_t i : test_rows) out.test.labels.push_back(task.task_label(base.labels[i]));
  out.target_samples = base.features.rows_at(target_rows);
  out.pool_source_rows = std::move(pool_rows);
  out.test_source_rows = std::move(test_rows);
  out.target_sample_source_rows = std::move(target_rows);
  return out;
}

inline PoolSplits build_messy_pool(const Dataset& targets_source, const Dataset& redundant_source,
                                   const TaskSpec& task, const MessyPoolConfig& cfg) {
  return build_messy_pool(concat_with_class_offset(targets_source, redundant_source), task, cfg);
}

/// Uniform per-task-class initial labels; classes absent from the pool
/// (an unused redundant category) are skipped.
inline std::vector<std::size_t> sample_initial_labeled(const PoolSplits& splits,
                                                       std::size_t per_class,
                                                       std::uint64_t seed) {
  require(per_class >= 1, "sample_initial_labeled: per_class must be positive");
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < splits.pool.size(); ++i)
    by_label[splits.pool.labels[i]].push_back(i);

  Rng root(seed);
  std::vector<std::size_t> out;
  for (const auto& [label, rows] : by_label) {
    require(rows.size() >= per_class,
            "sample_initial_labeled: task class " + std::to_string(label) + " has only " +
                std::to_string(rows.size()) + " pool examples, need " +
                std::to_string(per_class));
    Rng cls = root.stream("init-class", static_cast<std::uint64_t>(label));
    const auto picks = cls.sample_without_replacement(rows.size(), per_class);
    for (std::size_t p : picks) out.push_back(rows[p]);
  }
  return out;
}

}  // namespace tdal
