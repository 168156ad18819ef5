#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "tdal/messy_pool.hpp"
#include "tdal/synthetic.hpp"

using namespace tdal;

namespace {

std::pair<Dataset, TaskSpec> standard_base(int per_class = 400) {
  SyntheticConfig cfg;
  cfg.target_classes = 3;
  cfg.redundant_classes = 7;
  cfg.task_dims = 3;
  cfg.nuisance_dims = 7;
  cfg.per_class = per_class;
  return make_synthetic_messy(cfg, 11);
}

std::map<int, std::size_t> label_counts(const Dataset& ds) {
  std::map<int, std::size_t> counts;
  for (int y : ds.labels) ++counts[y];
  return counts;
}

}  // namespace

TEST_CASE("build_messy_pool quotas and imbalance") {
  auto [base, task] = standard_base();

  SECTION("IR=10 makes each target class about a tenth of each redundant class") {
    MessyPoolConfig cfg;
    cfg.imbalance_ratio = 10.0;
    cfg.pool_size = 2000;
    cfg.test_size = 400;
    cfg.target_sample_size = 200;
    cfg.seed = 5;
    PoolSplits splits = build_messy_pool(base, task, cfg);

    CHECK(splits.pool.size() == 2000);
    CHECK(splits.test.size() == 400);
    CHECK(splits.target_samples.rows() == 200);

    // count raw-class allocations through the source rows
    std::map<int, std::size_t> pool_by_raw;
    for (std::size_t i : splits.pool_source_rows) ++pool_by_raw[base.labels[i]];
    double target_mean = 0.0, redundant_mean = 0.0;
    for (int c = 0; c < 10; ++c) {
      if (c < 3)
        target_mean += static_cast<double>(pool_by_raw[c]) / 3.0;
      else
        redundant_mean += static_cast<double>(pool_by_raw[c]) / 7.0;
    }
    // realized imbalance within one example-rounding of the requested IR
    CHECK(std::abs(redundant_mean / cfg.imbalance_ratio - target_mean) <= 1.0);
  }

  SECTION("task labels collapse and test balance") {
    MessyPoolConfig cfg;
    cfg.imbalance_ratio = 10.0;
    cfg.pool_size = 1500;
    cfg.test_size = 400;
    cfg.target_sample_size = 100;
    cfg.seed = 7;
    PoolSplits splits = build_messy_pool(base, task, cfg);

    for (int y : splits.pool.labels) {
      CHECK(y >= 0);
      CHECK(y < task.task_class_count());
    }
    auto test_counts = label_counts(splits.test);
    CHECK(test_counts.size() == 4);
    for (const auto& [label, count] : test_counts) CHECK(count == 100);
  }

  SECTION("pool, test, and target samples are pairwise disjoint") {
    MessyPoolConfig cfg;
    cfg.imbalance_ratio = 5.0;
    cfg.pool_size = 1200;
    cfg.test_size = 300;
    cfg.target_sample_size = 150;
    cfg.seed = 9;
    PoolSplits splits = build_messy_pool(base, task, cfg);

    std::set<std::size_t> pool_set(splits.pool_source_rows.begin(),
                                   splits.pool_source_rows.end());
    std::set<std::size_t> test_set(splits.test_source_rows.begin(),
                                   splits.test_source_rows.end());
    std::set<std::size_t> ts_set(splits.target_sample_source_rows.begin(),
                                 splits.target_sample_source_rows.end());
    CHECK(pool_set.size() == splits.pool_source_rows.size());
    CHECK(test_set.size() == splits.test_source_rows.size());
    CHECK(ts_set.size() == splits.target_sample_source_rows.size());
    for (std::size_t i : test_set) CHECK(pool_set.count(i) == 0);
    for (std::size_t i : ts_set) {
      CHECK(pool_set.count(i) == 0);
      CHECK(test_set.count(i) == 0);
    }
    // target samples come only from target-class rows
    for (std::size_t i : splits.target_sample_source_rows)
      CHECK(task.task_label(base.labels[i]) != task.redundant_class_index());
  }

  SECTION("construction is a pure function of inputs and seed") {
    MessyPoolConfig cfg;
    cfg.imbalance_ratio = 10.0;
    cfg.pool_size = 1000;
    cfg.test_size = 200;
    cfg.target_sample_size = 100;
    cfg.seed = 123;
    PoolSplits a = build_messy_pool(base, task, cfg);
    PoolSplits b = build_messy_pool(base, task, cfg);
    CHECK(a.pool_source_rows == b.pool_source_rows);
    CHECK(a.test_source_rows == b.test_source_rows);
    CHECK(a.target_sample_source_rows == b.target_sample_source_rows);
    CHECK(a.pool.labels == b.pool.labels);

    cfg.seed = 124;
    PoolSplits c = build_messy_pool(base, task, cfg);
    CHECK(a.pool_source_rows != c.pool_source_rows);
  }

  SECTION("all-target task uses no redundant category") {
    SyntheticConfig scfg;
    scfg.target_classes = 4;
    scfg.redundant_classes = 0;
    scfg.task_dims = 2;
    scfg.nuisance_dims = 0;
    scfg.nuisance_scale = 0.0;
    scfg.per_class = 200;
    auto [all_target_base, all_task] = make_synthetic_messy(scfg, 21);

    MessyPoolConfig cfg;
    cfg.imbalance_ratio = 1.0;
    cfg.pool_size = 400;
    cfg.test_size = 100;
    cfg.target_sample_size = 50;
    cfg.seed = 3;
    PoolSplits splits = build_messy_pool(all_target_base, all_task, cfg);
    auto counts = label_counts(splits.pool);
    CHECK(counts.size() == 4);  // no redundant label present
    CHECK(counts.count(all_task.redundant_class_index()) == 0);
    for (const auto& [label, count] : counts) CHECK(count == 100);
  }

  SECTION("high imbalance keeps integer quotas and errors on underflow") {
    MessyPoolConfig cfg;
    cfg.imbalance_ratio = 150.0;
    cfg.pool_size = 2000;
    cfg.test_size = 200;
    cfg.target_sample_size = 50;
    cfg.seed = 2;
    PoolSplits splits = build_messy_pool(base, task, cfg);
    std::map<int, std::size_t> pool_by_raw;
    for (std::size_t i : splits.pool_source_rows) ++pool_by_raw[base.labels[i]];
    // enumeration: q=285 gives 7*285 + 3*floor(285/150) = 1998, remainder 2
    for (int c = 0; c < 3; ++c) CHECK(pool_by_raw[c] == 1);
    std::size_t redundant_total = 0;
    for (int c = 3; c < 10; ++c) redundant_total += pool_by_raw[c];
    CHECK(redundant_total == 1997);

    cfg.imbalance_ratio = 100000.0;
    CHECK_THROWS_WITH(build_messy_pool(base, task, cfg),
                      Catch::Matchers::ContainsSubstring("quota underflow"));
  }

  SECTION("insufficient class examples error") {
    auto [small_base, small_task] = standard_base(40);
    MessyPoolConfig cfg;
    cfg.imbalance_ratio = 2.0;
    cfg.pool_size = 350;
    cfg.test_size = 80;
    cfg.target_sample_size = 30;
    cfg.seed = 4;
    CHECK_THROWS_AS(build_messy_pool(small_base, small_task, cfg), value_error);
  }
}

TEST_CASE("sample_initial_labeled") {
  auto [base, task] = standard_base();
  MessyPoolConfig cfg;
  cfg.imbalance_ratio = 10.0;
  cfg.pool_size = 1500;
  cfg.test_size = 300;
  cfg.target_sample_size = 100;
  cfg.seed = 5;
  PoolSplits splits = build_messy_pool(base, task, cfg);

  SECTION("two per class over four task classes") {
    auto idx = sample_initial_labeled(splits, 2, 42);
    REQUIRE(idx.size() == 8);
    std::set<std::size_t> distinct(idx.begin(), idx.end());
    CHECK(distinct.size() == 8);
    std::map<int, int> per_class;
    for (std::size_t i : idx) ++per_class[splits.pool.labels[i]];
    for (int c = 0; c < 4; ++c) CHECK(per_class[c] == 2);

    auto again = sample_initial_labeled(splits, 2, 42);
    CHECK(idx == again);
  }

  SECTION("class with exactly one example is picked deterministically") {
    // a pool where some task class has a single member
    PoolSplits tiny = splits;
    tiny.pool.features = splits.pool.features;
    tiny.pool.labels.assign(splits.pool.size(), task.redundant_class_index());
    tiny.pool.labels[17] = 0;
    auto idx = sample_initial_labeled(tiny, 1, 1);
    REQUIRE(idx.size() == 2);  // class 0 and the redundant class
    CHECK(std::find(idx.begin(), idx.end(), 17u) != idx.end());
  }

  SECTION("insufficient members error") {
    CHECK_THROWS_AS(sample_initial_labeled(splits, 100000, 1), value_error);
  }
}
