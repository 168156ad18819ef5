#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"
#include "tdal/acquisition.hpp"
#include "tdal/forest.hpp"
#include "tdal/rng.hpp"

using namespace tdal;
using namespace tdal_test;

namespace {

struct Fixture {
  Matrix pool{20, 2};
  Matrix targets{6, 2};
  HeadPosterior head;
  EncoderModel encoder = EncoderModel::identity(2);

  Fixture() {
    Rng r(1);
    Matrix train(40, 2);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
      const int label = static_cast<int>(i % 2);
      train(i, 0) = (label ? 2.0 : -2.0) + r.normal();
      train(i, 1) = r.normal();
      y[i] = label;
    }
    ForestConfig cfg;
    cfg.n_trees = 12;
    cfg.seed = 3;
    head = HeadPosterior(fit_forest(train, y, 2, cfg));
    for (std::size_t k = 0; k < pool.size(); ++k) pool.data()[k] = r.normal() * 2.0;
    for (std::size_t k = 0; k < targets.size(); ++k) targets.data()[k] = r.normal() * 2.0;
  }
};

}  // namespace

TEST_CASE("score_pool") {
  Fixture fx;

  SECTION("random strategy is reproducible from the stream") {
    AcquisitionConfig cfg;
    cfg.strategy = Strategy::random;
    ScoreVector a = score_pool(fx.head, fx.encoder, fx.pool, fx.targets, cfg, Rng(42));
    ScoreVector b = score_pool(fx.head, fx.encoder, fx.pool, fx.targets, cfg, Rng(42));
    CHECK(a.scores == b.scores);
    ScoreVector c = score_pool(fx.head, fx.encoder, fx.pool, fx.targets, cfg, Rng(43));
    CHECK(a.scores != c.scores);
    for (double s : a.scores) {
      CHECK(s >= 0.0);
      CHECK(s < 1.0);
    }
  }

  SECTION("identical target rows equal single-target EPIG") {
    AcquisitionConfig cfg;
    cfg.strategy = Strategy::epig;
    cfg.realisations = 12;

    Matrix one_target(1, 2);
    one_target(0, 0) = 0.37;
    one_target(0, 1) = -0.8;
    Matrix many(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
      many(i, 0) = one_target(0, 0);
      many(i, 1) = one_target(0, 1);
    }
    ScoreVector single = score_pool(fx.head, fx.encoder, fx.pool, one_target, cfg, Rng(1));
    ScoreVector dup = score_pool(fx.head, fx.encoder, fx.pool, many, cfg, Rng(1));
    for (std::size_t i = 0; i < single.scores.size(); ++i)
      CHECK_THAT(dup.scores[i], Catch::Matchers::WithinAbs(single.scores[i], 1e-13));
  }

  SECTION("per-candidate scores equal direct per-candidate calls") {
    AcquisitionConfig cfg;
    cfg.realisations = 12;
    for (Strategy s : {Strategy::epig, Strategy::bald, Strategy::confidence}) {
      cfg.strategy = s;
      ScoreVector scores = score_pool(fx.head, fx.encoder, fx.pool, fx.targets, cfg, Rng(2));
      REQUIRE(scores.scores.size() == 20);

      MemberProbs targets_mp = fx.head.predict_members(fx.targets, cfg.realisations);
      std::vector<Matrix> target_members;
      for (std::size_t m = 0; m < targets_mp.batch; ++m)
        target_members.push_back(targets_mp.member_matrix(m));

      for (std::size_t i = 0; i < 20; ++i) {
        Matrix row(1, 2);
        row(0, 0) = fx.pool(i, 0);
        row(0, 1) = fx.pool(i, 1);
        MemberProbs mp = fx.head.predict_members(row, cfg.realisations);
        Matrix cand_members = mp.member_matrix(0);
        double expect = 0.0;
        switch (s) {
          case Strategy::epig: expect = epig(cand_members, target_members); break;
          case Strategy::bald: expect = bald(cand_members); break;
          case Strategy::confidence: expect = confidence_score(cand_members); break;
          default: break;
        }
        REQUIRE_THAT(scores.scores[i],
                     Catch::Matchers::WithinAbs(std::max(0.0, expect), 1e-12));
      }
    }
  }

  SECTION("realisation cap uses the first members") {
    AcquisitionConfig cfg;
    cfg.strategy = Strategy::bald;
    cfg.realisations = 5;
    ScoreVector capped = score_pool(fx.head, fx.encoder, fx.pool, fx.targets, cfg, Rng(3));
    MemberProbs mp = fx.head.predict_members(fx.pool, 5);
    CHECK(mp.members == 5);
    for (std::size_t i = 0; i < 20; ++i)
      CHECK_THAT(capped.scores[i],
                 Catch::Matchers::WithinAbs(std::max(0.0, bald(mp.member_matrix(i))), 1e-12));
  }

  SECTION("epig without target samples errors") {
    AcquisitionConfig cfg;
    cfg.strategy = Strategy::epig;
    CHECK_THROWS_AS(score_pool(fx.head, fx.encoder, fx.pool, Matrix(0, 2), cfg, Rng(4)),
                    value_error);
  }
}
