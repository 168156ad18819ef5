#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
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

enum class DecoderLikelihood { gaussian_unit_var, bernoulli };

struct SplitVaeConfig {
  std::size_t latent_dim = 10;     // |z|
  std::size_t classified_dim = 3;  // |z_c|, the coordinates under label pressure
  double alpha = 20.0;             // label-pressure weight on the classifier term
  std::size_t epochs = 150;
  std::size_t batch_size = 200;
  double learning_rate = 2e-4;
  DecoderLikelihood likelihood = DecoderLikelihood::gaussian_unit_var;
  // The objective as written rewards the raw probability of the true class;
  // set to true for the log-likelihood variant instead.
  bool classifier_log_prob = false;
  std::size_t encoder_hidden = 64;
  std::size_t decoder_hidden = 64;
  std::size_t classifier_hidden = 32;
  std::uint64_t seed = 0;

  void validate() const {
    require(latent_dim >= 1, "SplitVaeConfig: latent_dim must be positive");
    require(classified_dim >= 1 && classified_dim <= latent_dim,
            "SplitVaeConfig: need 1 <= classified_dim <= latent_dim");
    require(alpha >= 0.0, "SplitVaeConfig: alpha must be nonnegative");
    require(epochs >= 1 && batch_size >= 1 && learning_rate > 0.0,
            "SplitVaeConfig: bad training settings");
  }

  bool operator==(const SplitVaeConfig&) const = default;
};

/// Encoder/decoder/guidance-classifier triple trained jointly on the
/// split-latent semi-supervised objective.
struct SplitVae {
  Mlp encoder;     // d -> hidden -> 2|z| (mu, logvar)
  Mlp decoder;     // |z| -> hidden -> d (gaussian mean / bernoulli logits)
  Mlp classifier;  // |z_c| -> hidden -> C softmax
  std::size_t latent_dim = 0;
  std::size_t classified_dim = 0;
  DecoderLikelihood likelihood = DecoderLikelihood::gaussian_unit_var;
  bool classifier_log_prob = false;

  static SplitVae init(std::size_t input_dim, int class_count, const SplitVaeConfig& cfg,
                       const Rng& root) {
    cfg.validate();
    require(class_count >= 2, "SplitVae::init: need at least 2 classes");
    SplitVae m;
    m.latent_dim = cfg.latent_dim;
    m.classified_dim = cfg.classified_dim;
    m.likelihood = cfg.likelihood;
    m.classifier_log_prob = cfg.classifier_log_prob;
    m.encoder = Mlp::init({input_dim, cfg.encoder_hidden, 2 * cfg.latent_dim},
                          Mlp::Hidden::tanh, Mlp::Output::linear, root.stream("enc-init"));
    m.decoder = Mlp::init({cfg.latent_dim, cfg.decoder_hidden, input_dim}, Mlp::Hidden::tanh,
                          Mlp::Output::linear, root.stream("dec-init"));
    m.classifier =
        Mlp::init({cfg.classified_dim, cfg.classifier_hidden, static_cast<std::size_t>(class_count)},
                  Mlp::Hidden::tanh, Mlp::Output::softmax, root.stream("clf-init"));
    return m;
  }

  std::vector<Matrix*> params() {
    auto out = encoder.params();
    for (Matrix* p : decoder.params()) out.push_back(p);
    for (Matrix* p : classifier.params()) out.push_back(p);
    return out;
  }
};

struct SplitVaeGrads {
  Mlp::Grads encoder, decoder, classifier;

  std::vector<Matrix*> params() {
    auto out = encoder.params();
    for (Matrix* p : decoder.params()) out.push_back(p);
    for (Matrix* p : classifier.params()) out.push_back(p);
    return out;
  }

  void scale(double s) {
    encoder.scale(s);
    decoder.scale(s);
    classifier.scale(s);
  }
};

namespace detail {

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace detail

/// Batch objective with frozen reparameterization noise: mean ELBO plus,
/// when labels are given, alpha times the mean classifier term on the shared
/// latent sample. Returns the objective value; fills ascent gradients when
/// `grads` is non-null.
inline double split_vae_objective(const SplitVae& m, const Matrix& x,
                                  std::span<const int> labels, double alpha,
                                  const Matrix& eps, SplitVaeGrads* grads) {
  const std::size_t batch = x.rows();
  const std::size_t d = x.cols();
  const std::size_t L = m.latent_dim;
  require(batch >= 1, "split_vae_objective: empty batch");
  require_dims(eps.rows() == batch && eps.cols() == L,
               "split_vae_objective: noise shape mismatch");
  require_dims(labels.empty() || labels.size() == batch,
               "split_vae_objective: label count mismatch");
  const double inv_b = 1.0 / static_cast<double>(batch);

  const auto enc_f = m.encoder.forward(x);
  const Matrix& enc_out = enc_f.output();
  Matrix mu(batch, L), logvar(batch, L), sigma(batch, L), z(batch, L);
  for (std::size_t i = 0; i < batch; ++i)
    for (std::size_t j = 0; j < L; ++j) {
      mu(i, j) = enc_out(i, j);
      logvar(i, j) = enc_out(i, L + j);
      sigma(i, j) = std::exp(0.5 * logvar(i, j));
      z(i, j) = mu(i, j) + sigma(i, j) * eps(i, j);
    }

  const auto dec_f = m.decoder.forward(z);
  const Matrix& xhat = dec_f.output();

  double recon = 0.0;
  Matrix d_xhat(batch, d);  // ascent gradient of mean recon term wrt decoder output
  if (m.likelihood == DecoderLikelihood::gaussian_unit_var) {
    constexpr double half_log_2pi = 0.9189385332046727;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double diff = x.data()[k] - xhat.data()[k];
      recon += -0.5 * diff * diff;
      d_xhat.data()[k] = diff * inv_b;
    }
    recon = recon * inv_b - half_log_2pi * static_cast<double>(d);
  } else {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double logit = xhat.data()[k];
      const double xv = x.data()[k];
      recon += xv * logit - detail::softplus(logit);
      d_xhat.data()[k] = (xv - sigmoid(logit)) * inv_b;
    }
    recon *= inv_b;
  }

  double kl = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double mu2 = mu.data()[k] * mu.data()[k];
    const double s2 = sigma.data()[k] * sigma.data()[k];
    kl += 0.5 * (mu2 + s2 - 1.0 - logvar.data()[k]);
  }
  kl *= inv_b;

  double objective = recon - kl;

  Mlp::Grads dec_g, clf_g;
  Matrix dz;
  if (grads) {
    dec_g = m.decoder.backward_logits(dec_f, d_xhat);
    dz = dec_g.dx;
  }

  if (!labels.empty() && alpha != 0.0) {
    Matrix zc = z.columns(0, m.classified_dim);
    const auto clf_f = m.classifier.forward(zc);
    const Matrix& probs = clf_f.output();
    double term = 0.0;
    if (m.classifier_log_prob) {
      term = -cross_entropy(probs, labels);
      if (grads) {
        Matrix dlogits = cross_entropy_logit_grad(probs, labels);
        dlogits *= -1.0;  // ascent on log-probability
        clf_g = m.classifier.backward_logits(clf_f, dlogits);
      }
    } else {
      for (std::size_t i = 0; i < batch; ++i) term += probs(i, labels[i]);
      term *= inv_b;
      if (grads) {
        Matrix up(batch, probs.cols());
        for (std::size_t i = 0; i < batch; ++i) up(i, labels[i]) = inv_b;
        clf_g = m.classifier.backward(clf_f, up);
      }
    }
    objective += alpha * term;
    if (grads) {
      clf_g.scale(alpha);
      for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < m.classified_dim; ++j) dz(i, j) += clf_g.dx(i, j);
    }
  }

  if (grads) {
    // reparameterization chain plus closed-form KL gradients
    Matrix d_enc_out(batch, 2 * L);
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < L; ++j) {
        const double dzij = dz(i, j);
        d_enc_out(i, j) = dzij - mu(i, j) * inv_b;
        d_enc_out(i, L + j) = dzij * eps(i, j) * sigma(i, j) * 0.5 -
                              0.5 * (sigma(i, j) * sigma(i, j) - 1.0) * inv_b;
      }
    grads->encoder = m.encoder.backward_logits(enc_f, d_enc_out);
    grads->decoder = std::move(dec_g);
    if (clf_g.dw.empty()) clf_g = m.classifier.zero_grads();
    grads->classifier = std::move(clf_g);
  }

  if (!std::isfinite(objective))
    throw numeric_error("split_vae_objective: non-finite objective");
  return objective;
}

/// Standard VAE evidence lower bound with freshly drawn reparameterization
/// noise; value plus ascent gradients.
inline double elbo(const SplitVae& m, const Matrix& x, Rng& rng, SplitVaeGrads* grads = nullptr) {
  Matrix eps(x.rows(), m.latent_dim);
  for (std::size_t k = 0; k < eps.size(); ++k) eps.data()[k] = rng.normal();
  return split_vae_objective(m, x, {}, 0.0, eps, grads);
}

/// Closed-form KL(N(mu, diag sigma^2) || N(0, I)) summed over dimensions.
inline double gaussian_kl_to_standard(std::span<const double> mu, std::span<const double> sigma) {
  require_dims(mu.size() == sigma.size(), "gaussian_kl_to_standard: length mismatch");
  double kl = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    require(sigma[j] > 0.0, "gaussian_kl_to_standard: sigma must be positive");
    kl += 0.5 * (mu[j] * mu[j] + sigma[j] * sigma[j] - 1.0) - std::log(sigma[j]);
  }
  return kl;
}

namespace detail {

// Bresenham-style proportional merge: labeled batches sit evenly among the
// unlabeled ones. false = unlabeled slot, true = labeled slot.
inline std::vector<bool> interleave_schedule(std::size_t n_unlabeled, std::size_t n_labeled) {
  std::vector<std::pair<double, bool>> keyed;
  keyed.reserve(n_unlabeled + n_labeled);
  for (std::size_t j = 0; j < n_unlabeled; ++j)
    keyed.emplace_back((j + 0.5) / static_cast<double>(n_unlabeled), false);
  for (std::size_t i = 0; i < n_labeled; ++i)
    keyed.emplace_back((i + 0.5) / static_cast<double>(n_labeled), true);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<bool> out;
  out.reserve(keyed.size());
  for (const auto& [key, labeled] : keyed) out.push_back(labeled);
  return out;
}

}  // namespace detail

/// Trains the split-latent VAE on the unlabeled pool plus the labeled set
/// (minority task classes upsampled to the majority count), and returns the
/// posterior-mean encoder whose first |z_c| coordinates feed the head.
inline EncoderModel fit_td_split(const Matrix& pool_x, const Matrix& labeled_x,
                                 const std::vector<int>& labeled_y, int class_count,
                                 const SplitVaeConfig& cfg) {
  cfg.validate();
  require(labeled_x.rows() >= 1 && !labeled_y.empty(), "fit_td_split: empty labeled set");
  require(pool_x.rows() >= 1, "fit_td_split: empty pool");
  require_dims(pool_x.cols() == labeled_x.cols(), "fit_td_split: feature dims differ");

  Rng root(cfg.seed);
  SplitVae model = SplitVae::init(pool_x.cols(), class_count, cfg, root);
  auto params = model.params();
  AdamState adam(cfg.learning_rate, params);

  const auto upsampled = upsample_balanced(labeled_y);
  const std::size_t bs = cfg.batch_size;

  std::vector<std::size_t> pool_order(pool_x.rows());
  for (std::size_t i = 0; i < pool_order.size(); ++i) pool_order[i] = i;
  std::vector<std::size_t> lab_order = upsampled;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffler = root.stream("epoch-order", epoch);
    shuffler.shuffle(pool_order);
    shuffler.shuffle(lab_order);
    Rng noise = root.stream("epoch-noise", epoch);

    const std::size_t n_u = (pool_order.size() + bs - 1) / bs;
    const std::size_t n_l = (lab_order.size() + bs - 1) / bs;
    const auto schedule = detail::interleave_schedule(n_u, n_l);

    std::size_t u_next = 0, l_next = 0;
    for (bool labeled_slot : schedule) {
      std::vector<std::size_t> idx;
      std::vector<int> batch_y;
      if (labeled_slot) {
        const std::size_t lo = l_next * bs;
        const std::size_t hi = std::min(lo + bs, lab_order.size());
        for (std::size_t k = lo; k < hi; ++k) {
          idx.push_back(lab_order[k]);
          batch_y.push_back(labeled_y[lab_order[k]]);
        }
        ++l_next;
      } else {
        const std::size_t lo = u_next * bs;
        const std::size_t hi = std::min(lo + bs, pool_order.size());
        for (std::size_t k = lo; k < hi; ++k) idx.push_back(pool_order[k]);
        ++u_next;
      }
      const Matrix bx = (labeled_slot ? labeled_x : pool_x).rows_at(idx);
      Matrix eps(bx.rows(), cfg.latent_dim);
      for (std::size_t k = 0; k < eps.size(); ++k) eps.data()[k] = noise.normal();

      SplitVaeGrads grads;
      try {
        split_vae_objective(model, bx, batch_y, cfg.alpha, eps, &grads);
      } catch (const numeric_error& e) {
        throw numeric_error("fit_td_split: epoch " + std::to_string(epoch) + ": " + e.what());
      }
      grads.scale(-1.0);  // Adam minimizes; the objective is maximized
      adam.step(params, grads.params());
    }
  }

  SplitVaeEncoder enc;
  enc.net = model.encoder;
  enc.latent_dim = cfg.latent_dim;
  enc.classified_dim = cfg.classified_dim;
  return EncoderModel::td_split(std::move(enc));
}

}  // namespace tdal
