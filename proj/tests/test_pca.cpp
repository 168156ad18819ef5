#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "tdal/messy_pool.hpp"
#include "tdal/pca.hpp"
#include "tdal/rng.hpp"
#include "tdal/synthetic.hpp"

using namespace tdal;
using namespace tdal_test;

TEST_CASE("fit_pca") {
  SECTION("keeps the dominant axis") {
    Rng r(1);
    Matrix x(500, 2);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      x(i, 0) = 3.0 * r.normal() + 5.0;
      x(i, 1) = 1.0 * r.normal() - 2.0;
    }
    EncoderModel enc = fit_pca(x, 1);
    const auto* p = enc.as_pca();
    REQUIRE(p != nullptr);
    CHECK(std::abs(p->components(0, 0)) > 0.99);
    CHECK(std::abs(p->components(1, 0)) < 0.1);
    CHECK(p->components(0, 0) > 0.0);  // sign convention
  }

  SECTION("full-rank encoding is an isometry") {
    Rng r(2);
    Matrix x(200, 4);
    for (std::size_t k = 0; k < x.size(); ++k) x.data()[k] = r.normal() * (1.0 + k % 3);
    EncoderModel enc = fit_pca(x, 4);
    Matrix z = enc.encode(x);
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t a = r.uniform_index(x.rows());
      const std::size_t b = r.uniform_index(x.rows());
      double dx = 0.0, dz = 0.0;
      for (std::size_t j = 0; j < 4; ++j) {
        dx += (x(a, j) - x(b, j)) * (x(a, j) - x(b, j));
        dz += (z(a, j) - z(b, j)) * (z(a, j) - z(b, j));
      }
      CHECK_THAT(std::sqrt(dz), Catch::Matchers::WithinAbs(std::sqrt(dx), 1e-9));
    }
  }

  SECTION("degenerate directions are handled") {
    Matrix x(50, 3);
    Rng r(3);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      x(i, 0) = r.normal();
      x(i, 1) = 2.0 * x(i, 0);  // collinear
      x(i, 2) = 0.0;            // constant
    }
    EncoderModel enc = fit_pca(x, 3);
    Matrix z = enc.encode(x);
    CHECK(z.all_finite());
  }

  SECTION("encode is deterministic and repeatable") {
    Rng r(4);
    Matrix x(100, 5);
    for (std::size_t k = 0; k < x.size(); ++k) x.data()[k] = r.normal();
    EncoderModel a = fit_pca(x, 2);
    EncoderModel b = fit_pca(x, 2);
    CHECK(a.encode(x) == b.encode(x));
  }

  SECTION("out_dim larger than min(N, d) errors") {
    CHECK_THROWS_AS(fit_pca(Matrix(10, 3), 4), value_error);
  }
}

TEST_CASE("pca on the messy pool loses task information", "[slow]") {
  SyntheticConfig scfg;
  scfg.target_classes = 3;
  scfg.redundant_classes = 7;
  scfg.task_dims = 3;
  scfg.nuisance_dims = 7;
  scfg.nuisance_scale = 3.0;
  scfg.per_class = 300;
  auto [base, task] = make_synthetic_messy(scfg, 31);

  MessyPoolConfig pcfg;
  pcfg.imbalance_ratio = 10.0;
  pcfg.pool_size = 1600;
  pcfg.test_size = 400;
  pcfg.target_sample_size = 100;
  pcfg.seed = 8;
  PoolSplits splits = build_messy_pool(base, task, pcfg);

  EncoderModel enc = fit_pca(splits.pool.features, 3);

  // balanced probe sample over task classes, drawn from the test split
  const Matrix z = enc.encode(splits.test.features);
  LinearProbe probe_enc(3, 4);
  probe_enc.fit(z, splits.test.labels);
  const double acc_encoded = probe_enc.accuracy(z, splits.test.labels);

  const Matrix task_dims_only = splits.test.features.columns(0, 3);
  LinearProbe probe_raw(3, 4);
  probe_raw.fit(task_dims_only, splits.test.labels);
  const double acc_raw = probe_raw.accuracy(task_dims_only, splits.test.labels);

  INFO("probe on PCA encodings: " << acc_encoded << ", probe on raw task dims: " << acc_raw);
  CHECK(acc_encoded <= 0.6);
  CHECK(acc_raw >= 0.9);
}
