#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tdal/adam.hpp"
#include "tdal/dataset.hpp"
#include "tdal/encoder.hpp"
#include "tdal/error.hpp"
#include "tdal/matrix.hpp"
#include "tdal/mlp.hpp"
#include "tdal/rng.hpp"

namespace tdal {

struct FineTuneConfig {
  std::size_t representation_dim = 8;
  std::size_t encoder_hidden = 32;
  std::size_t classifier_hidden = 32;  // guidance classifier, one hidden layer
  std::size_t pretrain_epochs = 150;
  std::size_t finetune_epochs = 80;
  double pretrain_learning_rate = 1e-3;
  double finetune_learning_rate = 1e-3;
  std::size_t batch_size = 100;
  bool upsample_minority = true;
  std::uint64_t seed = 0;

  void validate() const {
    require(representation_dim >= 1, "FineTuneConfig: representation_dim must be positive");
    require(batch_size >= 1, "FineTuneConfig: batch_size must be positive");
    require(pretrain_learning_rate > 0.0 && finetune_learning_rate > 0.0,
            "FineTuneConfig: learning rates must be positive");
  }

  bool operator==(const FineTuneConfig&) const = default;
};

/// Stage-1 result, computed once per experiment and reused by every refit.
struct PretrainedAutoencoder {
  Mlp encoder;
  Mlp decoder;
  bool ready = false;
};

/// Reconstruction-MSE autoencoder on the pool; the encoder half becomes the
/// pretrained representation.
inline PretrainedAutoencoder pretrain_autoencoder(const Matrix& pool_x,
                                                  const FineTuneConfig& cfg) {
  cfg.validate();
  require(pool_x.rows() >= 1, "pretrain_autoencoder: empty pool");

  Rng root(cfg.seed);
  PretrainedAutoencoder pre;
  pre.encoder = Mlp::init({pool_x.cols(), cfg.encoder_hidden, cfg.representation_dim},
                          Mlp::Hidden::tanh, Mlp::Output::linear, root.stream("enc-init"));
  pre.decoder = Mlp::init({cfg.representation_dim, cfg.encoder_hidden, pool_x.cols()},
                          Mlp::Hidden::tanh, Mlp::Output::linear, root.stream("dec-init"));

  auto enc_params = pre.encoder.params();
  auto dec_params = pre.decoder.params();
  std::vector<Matrix*> params = enc_params;
  params.insert(params.end(), dec_params.begin(), dec_params.end());
  AdamState adam(cfg.pretrain_learning_rate, params);

  std::vector<std::size_t> order(pool_x.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
    Rng shuffler = root.stream("epoch-order", epoch);
    shuffler.shuffle(order);
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      const std::size_t hi = std::min(lo + cfg.batch_size, order.size());
      std::vector<std::size_t> idx(order.begin() + lo, order.begin() + hi);
      const Matrix bx = pool_x.rows_at(idx);

      const auto enc_f = pre.encoder.forward(bx);
      const auto dec_f = pre.decoder.forward(enc_f.output());
      const double loss = mse_loss(dec_f.output(), bx);
      if (!std::isfinite(loss))
        throw numeric_error("pretrain_autoencoder: non-finite loss at epoch " +
                            std::to_string(epoch));
      auto dec_g = pre.decoder.backward_logits(dec_f, mse_grad(dec_f.output(), bx));
      auto enc_g = pre.encoder.backward_logits(enc_f, dec_g.dx);

      std::vector<Matrix*> grads = enc_g.params();
      auto dgp = dec_g.params();
      grads.insert(grads.end(), dgp.begin(), dgp.end());
      adam.step(params, grads);
    }
  }
  pre.ready = true;
  return pre;
}

/// Supervised loss for stage 2: mean cross-entropy of classifier(encoder(x)).
/// Fills ascent-opposite (descent) gradients, encoder first then classifier.
inline double finetune_ce_loss(const Mlp& encoder, const Mlp& classifier, const Matrix& x,
                               std::span<const int> labels, Mlp::Grads* enc_grads,
                               Mlp::Grads* clf_grads) {
  const auto enc_f = encoder.forward(x);
  const auto clf_f = classifier.forward(enc_f.output());
  const double loss = cross_entropy(clf_f.output(), labels);
  if (enc_grads || clf_grads) {
    auto cg = classifier.backward_logits(clf_f, cross_entropy_logit_grad(clf_f.output(), labels));
    if (enc_grads) *enc_grads = encoder.backward_logits(enc_f, cg.dx);
    if (clf_grads) *clf_grads = std::move(cg);
  }
  return loss;
}

/// Stage 2: restore the cached pretrained encoder, attach a guidance
/// classifier, and fine-tune both on the (optionally upsampled) labeled set.
/// The cache is pretrained on first use and never mutated afterwards.
inline EncoderModel fit_td_ft(const Matrix& pool_x, const Matrix& labeled_x,
                              const std::vector<int>& labeled_y, int class_count,
                              const FineTuneConfig& cfg, PretrainedAutoencoder& cache) {
  cfg.validate();
  require(labeled_x.rows() >= 1 && !labeled_y.empty(), "fit_td_ft: empty labeled set");
  require(class_count >= 2, "fit_td_ft: need at least 2 classes");

  if (!cache.ready) cache = pretrain_autoencoder(pool_x, cfg);

  Rng root(cfg.seed);
  Mlp encoder = cache.encoder;  // restore-from-checkpoint; cache stays untouched
  Mlp classifier =
      Mlp::init({cfg.representation_dim, cfg.classifier_hidden, static_cast<std::size_t>(class_count)},
                Mlp::Hidden::tanh, Mlp::Output::softmax, root.stream("clf-init"));

  std::vector<Matrix*> params = encoder.params();
  auto cp = classifier.params();
  params.insert(params.end(), cp.begin(), cp.end());
  AdamState adam(cfg.finetune_learning_rate, params);

  std::vector<std::size_t> base = cfg.upsample_minority ? upsample_balanced(labeled_y)
                                                        : std::vector<std::size_t>();
  if (!cfg.upsample_minority) {
    base.resize(labeled_y.size());
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = i;
  }

  for (std::size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
    Rng shuffler = root.stream("ft-epoch", epoch);
    std::vector<std::size_t> order = base;
    shuffler.shuffle(order);
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      const std::size_t hi = std::min(lo + cfg.batch_size, order.size());
      std::vector<std::size_t> idx(order.begin() + lo, order.begin() + hi);
      const Matrix bx = labeled_x.rows_at(idx);
      std::vector<int> by;
      by.reserve(idx.size());
      for (std::size_t i : idx) by.push_back(labeled_y[i]);

      Mlp::Grads enc_g, clf_g;
      const double loss = finetune_ce_loss(encoder, classifier, bx, by, &enc_g, &clf_g);
      if (!std::isfinite(loss))
        throw numeric_error("fit_td_ft: non-finite loss at epoch " + std::to_string(epoch));

      std::vector<Matrix*> grads = enc_g.params();
      auto cgp = clf_g.params();
      grads.insert(grads.end(), cgp.begin(), cgp.end());
      adam.step(params, grads);
    }
  }

  FineTuneEncoder out;
  out.net = std::move(encoder);
  return EncoderModel::td_ft(std::move(out));
}

}  // namespace tdal
