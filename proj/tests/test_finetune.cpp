#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"
#include "tdal/finetune.hpp"
#include "tdal/grad_check.hpp"
#include "tdal/synthetic.hpp"

using namespace tdal;
using namespace tdal_test;

namespace {

FineTuneConfig small_config(std::uint64_t seed) {
  FineTuneConfig cfg;
  cfg.representation_dim = 3;
  cfg.encoder_hidden = 12;
  cfg.classifier_hidden = 8;
  cfg.pretrain_epochs = 20;
  cfg.finetune_epochs = 30;
  cfg.batch_size = 50;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("fine-tune cross-entropy gradients pass finite differences") {
  Rng r(3);
  Mlp enc = Mlp::init({3, 5, 2}, Mlp::Hidden::tanh, Mlp::Output::linear, r.stream("e"));
  Mlp clf = Mlp::init({2, 4, 3}, Mlp::Hidden::tanh, Mlp::Output::softmax, r.stream("c"));
  Matrix x(6, 3);
  for (std::size_t k = 0; k < x.size(); ++k) x.data()[k] = r.normal();
  std::vector<int> y{0, 1, 2, 0, 2, 1};

  auto fn = [&]() {
    Mlp::Grads eg, cg;
    const double loss = finetune_ce_loss(enc, clf, x, y, &eg, &cg);
    std::vector<Matrix> grads;
    for (Matrix* p : eg.params()) grads.push_back(*p);
    for (Matrix* p : cg.params()) grads.push_back(*p);
    return std::make_pair(loss, grads);
  };
  std::vector<Matrix*> params = enc.params();
  for (Matrix* p : clf.params()) params.push_back(p);
  CHECK(grad_check(fn, params) <= 1e-4);
}

TEST_CASE("fit_td_ft") {
  SyntheticConfig scfg;
  scfg.target_classes = 3;
  scfg.redundant_classes = 0;
  scfg.task_dims = 3;
  scfg.nuisance_dims = 0;
  scfg.nuisance_scale = 0.0;
  scfg.per_class = 60;
  auto [base, task] = make_synthetic_messy(scfg, 61);
  std::vector<int> task_labels;
  for (int y : base.labels) task_labels.push_back(task.task_label(y));

  SECTION("zero fine-tune epochs returns the pretrained encoder") {
    FineTuneConfig cfg = small_config(5);
    cfg.finetune_epochs = 0;
    PretrainedAutoencoder cache;
    EncoderModel enc = fit_td_ft(base.features, base.features, task_labels, 4, cfg, cache);
    REQUIRE(cache.ready);
    const auto* ft = enc.as_td_ft();
    REQUIRE(ft != nullptr);
    for (std::size_t l = 0; l < ft->net.weights.size(); ++l)
      CHECK(ft->net.weights[l] == cache.encoder.weights[l]);
  }

  SECTION("guidance classifier reaches high training accuracy on separable data") {
    FineTuneConfig cfg = small_config(6);
    cfg.finetune_epochs = 120;
    PretrainedAutoencoder cache;
    EncoderModel enc = fit_td_ft(base.features, base.features, task_labels, 4, cfg, cache);

    // separability of the learned representation stands in for classifier accuracy
    Matrix z = enc.encode(base.features);
    LinearProbe probe(z.cols(), 4);
    probe.fit(z, task_labels);
    CHECK(probe.accuracy(z, task_labels) >= 0.9);
  }

  SECTION("refits restore the same cached checkpoint") {
    FineTuneConfig cfg = small_config(7);
    PretrainedAutoencoder cache;
    EncoderModel first = fit_td_ft(base.features, base.features, task_labels, 4, cfg, cache);
    const Mlp cached_before = cache.encoder;

    // second refit with a different labeled subset
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < 60; ++i) subset.push_back(i * 3);
    Matrix lab_x = base.features.rows_at(subset);
    std::vector<int> lab_y;
    for (std::size_t i : subset) lab_y.push_back(task_labels[i]);
    EncoderModel second = fit_td_ft(base.features, lab_x, lab_y, 4, cfg, cache);

    for (std::size_t l = 0; l < cache.encoder.weights.size(); ++l) {
      CHECK(cache.encoder.weights[l] == cached_before.weights[l]);
      CHECK(cache.encoder.biases[l] == cached_before.biases[l]);
    }
    // and the refit actually trained something different
    CHECK(first.encode(base.features) != second.encode(base.features));
  }

  SECTION("empty labeled set errors") {
    FineTuneConfig cfg = small_config(8);
    PretrainedAutoencoder cache;
    CHECK_THROWS_WITH(fit_td_ft(base.features, Matrix(0, 3), {}, 4, cfg, cache),
                      Catch::Matchers::ContainsSubstring("empty labeled set"));
  }

  SECTION("deterministic given the seed") {
    FineTuneConfig cfg = small_config(9);
    PretrainedAutoencoder c1, c2;
    EncoderModel a = fit_td_ft(base.features, base.features, task_labels, 4, cfg, c1);
    EncoderModel b = fit_td_ft(base.features, base.features, task_labels, 4, cfg, c2);
    CHECK(a.encode(base.features) == b.encode(base.features));
  }
}
