#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tdal/adam.hpp"
#include "tdal/error.hpp"
#include "tdal/matrix.hpp"
#include "tdal/mlp.hpp"
#include "tdal/rng.hpp"

namespace tdal {

struct LaplaceConfig {
  std::size_t hidden = 128;
  // 0 = use dim(theta), the parameter count of the head; the likelihood term
  // is raised to this power.
  double tempering = 0.0;
  std::size_t posterior_samples = 100;  // K
  std::size_t map_steps = 500;
  double map_learning_rate = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    require(hidden >= 1, "LaplaceConfig: hidden must be positive");
    require(tempering >= 0.0, "LaplaceConfig: tempering must be nonnegative");
    require(posterior_samples >= 1, "LaplaceConfig: posterior_samples must be positive");
    require(map_learning_rate > 0.0, "LaplaceConfig: map_learning_rate must be positive");
  }

  bool operator==(const LaplaceConfig&) const = default;
};

/// One-hidden-layer net with a diagonal Laplace-approximated posterior over
/// its weights; K weight samples are drawn at fit time and cached so member
/// predictions stay deterministic within a round.
struct LaplaceMlpHead {
  Mlp map_net;
  std::vector<Mlp> members;
  std::vector<double> hessian_diag;
  double tempering = 1.0;
  std::size_t input_dim = 0;
  std::size_t class_count = 0;
};

/// MAP loss: tempering * summed NLL + 0.5 ||theta||^2. Gradients are descent
/// gradients aligned with net.params().
inline double laplace_map_loss(const Mlp& net, const Matrix& z, std::span<const int> y,
                               double tempering, Mlp::Grads* grads) {
  double loss = 0.0;
  if (z.rows() > 0) {
    const auto f = net.forward(z);
    const Matrix& probs = f.output();
    for (std::size_t i = 0; i < z.rows(); ++i)
      loss -= std::log(std::max(probs(i, y[i]), 1e-300));
    loss *= tempering;
    if (grads) {
      Matrix dlogits = probs;
      for (std::size_t i = 0; i < z.rows(); ++i) dlogits(i, y[i]) -= 1.0;
      dlogits *= tempering;
      *grads = net.backward_logits(f, dlogits);
    }
  } else if (grads) {
    *grads = net.zero_grads();
  }

  // standard Gaussian prior
  double sq = 0.0;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (std::size_t k = 0; k < net.weights[l].size(); ++k)
      sq += net.weights[l].data()[k] * net.weights[l].data()[k];
    for (std::size_t k = 0; k < net.biases[l].size(); ++k)
      sq += net.biases[l].data()[k] * net.biases[l].data()[k];
  }
  loss += 0.5 * sq;
  if (grads) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      for (std::size_t k = 0; k < net.weights[l].size(); ++k)
        grads->dw[l].data()[k] += net.weights[l].data()[k];
      for (std::size_t k = 0; k < net.biases[l].size(); ++k)
        grads->db[l].data()[k] += net.biases[l].data()[k];
    }
  }
  return loss;
}

namespace detail {

// Diagonal Gauss-Newton of the tempered NLL plus the unit prior Hessian.
inline std::vector<double> laplace_ggn_diagonal(const Mlp& net, const Matrix& z,
                                                std::span<const int> y, double tempering) {
  const std::size_t P = net.param_count();
  std::vector<double> diag(P, 1.0);  // prior contributes the identity
  const std::size_t C = net.output_dim();

  std::vector<double> weighted_sq(P), weighted_sum(P);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    Matrix xi(1, z.cols());
    for (std::size_t j = 0; j < z.cols(); ++j) xi(0, j) = z(i, j);
    const auto f = net.forward(xi);
    const auto p = f.output().row(0);

    std::fill(weighted_sq.begin(), weighted_sq.end(), 0.0);
    std::fill(weighted_sum.begin(), weighted_sum.end(), 0.0);
    for (std::size_t c = 0; c < C; ++c) {
      Matrix up(1, C);
      up(0, c) = 1.0;
      auto g = net.backward_logits(f, up);
      std::size_t at = 0;
      for (std::size_t l = 0; l < g.dw.size(); ++l) {
        for (std::size_t k = 0; k < g.dw[l].size(); ++k, ++at) {
          const double v = g.dw[l].data()[k];
          weighted_sq[at] += p[c] * v * v;
          weighted_sum[at] += p[c] * v;
        }
        for (std::size_t k = 0; k < g.db[l].size(); ++k, ++at) {
          const double v = g.db[l].data()[k];
          weighted_sq[at] += p[c] * v * v;
          weighted_sum[at] += p[c] * v;
        }
      }
    }
    for (std::size_t at = 0; at < P; ++at)
      diag[at] += tempering * (weighted_sq[at] - weighted_sum[at] * weighted_sum[at]);
  }
  return diag;
}

}  // namespace detail

inline LaplaceMlpHead fit_laplace(const Matrix& z, const std::vector<int>& y,
                                  std::size_t class_count, const LaplaceConfig& cfg) {
  cfg.validate();
  require_dims(z.rows() == y.size(), "fit_laplace: label count mismatch");
  require(class_count >= 2, "fit_laplace: need at least 2 classes");
  for (int label : y)
    require(label >= 0 && static_cast<std::size_t>(label) < class_count,
            "fit_laplace: label out of range");

  Rng root(cfg.seed);
  LaplaceMlpHead head;
  head.input_dim = z.cols();
  head.class_count = class_count;
  head.map_net = Mlp::init({z.cols(), cfg.hidden, class_count}, Mlp::Hidden::tanh,
                           Mlp::Output::softmax, root.stream("map-init"));
  head.tempering =
      cfg.tempering > 0.0 ? cfg.tempering : static_cast<double>(head.map_net.param_count());

  auto params = head.map_net.params();
  AdamState adam(cfg.map_learning_rate, params);
  for (std::size_t step = 0; step < cfg.map_steps; ++step) {
    Mlp::Grads grads;
    const double loss = laplace_map_loss(head.map_net, z, y, head.tempering, &grads);
    if (!std::isfinite(loss)) throw numeric_error("fit_laplace: non-finite MAP loss");
    adam.step(params, grads.params());
  }

  head.hessian_diag = detail::laplace_ggn_diagonal(head.map_net, z, y, head.tempering);
  for (double& h : head.hessian_diag)
    if (!(h > 1e-6)) h = 1e-6;  // keep the posterior proper

  head.members.reserve(cfg.posterior_samples);
  for (std::size_t k = 0; k < cfg.posterior_samples; ++k) {
    Rng draw = root.stream("posterior-sample", k);
    Mlp member = head.map_net;
    std::size_t at = 0;
    for (std::size_t l = 0; l < member.weights.size(); ++l) {
      for (std::size_t i = 0; i < member.weights[l].size(); ++i, ++at)
        member.weights[l].data()[i] += draw.normal() / std::sqrt(head.hessian_diag[at]);
      for (std::size_t i = 0; i < member.biases[l].size(); ++i, ++at)
        member.biases[l].data()[i] += draw.normal() / std::sqrt(head.hessian_diag[at]);
    }
    head.members.push_back(std::move(member));
  }
  return head;
}

}  // namespace tdal
