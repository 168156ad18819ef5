#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/matrix.hpp"
#include "tdal/rng.hpp"

namespace tdal {

/// Row-wise softmax with log-sum-exp stabilization.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto in = logits.row(i);
    auto out = p.row(i);
    double m = -std::numeric_limits<double>::infinity();
    for (double v : in) m = std::max(m, v);
    double sum = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      out[j] = std::exp(in[j] - m);
      sum += out[j];
    }
    for (std::size_t j = 0; j < in.size(); ++j) out[j] /= sum;
  }
  return p;
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Small feed-forward network with explicit backpropagation.
class Mlp {
 public:
  enum class Hidden { tanh, relu };
  enum class Output { linear, softmax, sigmoid };

  std::vector<std::size_t> sizes;  // [d_in, hidden..., d_out]
  std::vector<Matrix> weights;     // layer l: sizes[l] x sizes[l+1]
  std::vector<Matrix> biases;      // layer l: 1 x sizes[l+1]
  Hidden hidden = Hidden::tanh;
  Output output = Output::linear;

  Mlp() = default;

  /// Glorot-uniform weights, zero biases.
  static Mlp init(std::vector<std::size_t> layer_sizes, Hidden h, Output o, Rng rng) {
    require(layer_sizes.size() >= 2, "Mlp::init: need at least input and output sizes");
    Mlp net;
    net.sizes = std::move(layer_sizes);
    net.hidden = h;
    net.output = o;
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
      const std::size_t fan_in = net.sizes[l], fan_out = net.sizes[l + 1];
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      Matrix w(fan_in, fan_out);
      for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] = rng.uniform(-bound, bound);
      net.weights.push_back(std::move(w));
      net.biases.emplace_back(1, fan_out);
    }
    return net;
  }

  std::size_t input_dim() const { return sizes.front(); }
  std::size_t output_dim() const { return sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  std::vector<Matrix*> params() {
    std::vector<Matrix*> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.push_back(&weights[l]);
      out.push_back(&biases[l]);
    }
    return out;
  }

  /// Per-layer activations kept for the backward pass; post[0] is the input,
  /// post.back() the network output.
  struct Forward {
    std::vector<Matrix> post;
    const Matrix& output() const { return post.back(); }
  };

  struct Grads {
    std::vector<Matrix> dw, db;
    Matrix dx;

    void scale(double s) {
      for (auto& m : dw) m *= s;
      for (auto& m : db) m *= s;
      dx *= s;
    }

    Grads& operator+=(const Grads& o) {
      for (std::size_t l = 0; l < dw.size(); ++l) {
        dw[l] += o.dw[l];
        db[l] += o.db[l];
      }
      return *this;
    }

    std::vector<Matrix*> params() {
      std::vector<Matrix*> out;
      for (std::size_t l = 0; l < dw.size(); ++l) {
        out.push_back(&dw[l]);
        out.push_back(&db[l]);
      }
      return out;
    }
  };

  Grads zero_grads() const {
    Grads g;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      g.dw.emplace_back(weights[l].rows(), weights[l].cols());
      g.db.emplace_back(1, biases[l].cols());
    }
    return g;
  }

  Forward forward(const Matrix& x) const {
    require_dims(x.cols() == input_dim(),
                 "Mlp::forward: input has " + std::to_string(x.cols()) + " cols, expected " +
                     std::to_string(input_dim()));
    Forward f;
    f.post.reserve(weights.size() + 1);
    f.post.push_back(x);
    for (std::size_t l = 0; l < weights.size(); ++l) {
      Matrix z = matmul(f.post.back(), weights[l]);
      for (std::size_t i = 0; i < z.rows(); ++i) {
        auto zi = z.row(i);
        auto b = biases[l].row(0);
        for (std::size_t j = 0; j < zi.size(); ++j) zi[j] += b[j];
      }
      const bool last = (l + 1 == weights.size());
      if (!last) {
        apply_hidden(z);
      } else {
        apply_output(z);
      }
      f.post.push_back(std::move(z));
    }
    return f;
  }

  Matrix operator()(const Matrix& x) const { return forward(x).output(); }

  /// Backward from a gradient on the network output (post-activation).
  Grads backward(const Forward& f, const Matrix& d_output) const {
    const Matrix& out = f.output();
    require_dims(d_output.same_shape(out), "Mlp::backward: upstream shape mismatch");
    Matrix dz(d_output.rows(), d_output.cols());
    switch (output) {
      case Output::linear:
        dz = d_output;
        break;
      case Output::softmax:
        for (std::size_t i = 0; i < out.rows(); ++i) {
          auto p = out.row(i);
          auto g = d_output.row(i);
          auto d = dz.row(i);
          double dot = 0.0;
          for (std::size_t j = 0; j < p.size(); ++j) dot += g[j] * p[j];
          for (std::size_t j = 0; j < p.size(); ++j) d[j] = p[j] * (g[j] - dot);
        }
        break;
      case Output::sigmoid:
        for (std::size_t k = 0; k < out.size(); ++k) {
          const double s = out.data()[k];
          dz.data()[k] = d_output.data()[k] * s * (1.0 - s);
        }
        break;
    }
    return backward_logits(f, dz);
  }

  /// Backward from a gradient on the final pre-activation ("logits").
  /// Used by fused losses (softmax cross-entropy, Bernoulli with logits).
  Grads backward_logits(const Forward& f, const Matrix& d_logits) const {
    require_dims(f.post.size() == weights.size() + 1, "Mlp::backward_logits: stale cache");
    Grads g = zero_grads();
    Matrix dz = d_logits;
    for (std::size_t l = weights.size(); l-- > 0;) {
      const Matrix& a = f.post[l];
      g.dw[l] = matmul_tn(a, dz);
      for (std::size_t i = 0; i < dz.rows(); ++i) {
        auto row = dz.row(i);
        auto acc = g.db[l].row(0);
        for (std::size_t j = 0; j < row.size(); ++j) acc[j] += row[j];
      }
      Matrix da = matmul_nt(dz, weights[l]);
      if (l > 0) {
        // chain through the hidden activation, derivative from cached outputs
        const Matrix& h = f.post[l];
        for (std::size_t k = 0; k < da.size(); ++k) {
          const double y = h.data()[k];
          da.data()[k] *= hidden == Hidden::tanh ? 1.0 - y * y : (y > 0.0 ? 1.0 : 0.0);
        }
      }
      dz = std::move(da);
    }
    g.dx = std::move(dz);
    return g;
  }

 private:
  void apply_hidden(Matrix& z) const {
    if (hidden == Hidden::tanh) {
      for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = std::tanh(z.data()[k]);
    } else {
      for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = std::max(0.0, z.data()[k]);
    }
  }

  void apply_output(Matrix& z) const {
    switch (output) {
      case Output::linear:
        break;
      case Output::softmax:
        z = softmax_rows(z);
        break;
      case Output::sigmoid:
        for (std::size_t k = 0; k < z.size(); ++k) z.data()[k] = sigmoid(z.data()[k]);
        break;
    }
  }
};

/// Mean negative log-likelihood of integer labels under row distributions.
inline double cross_entropy(const Matrix& probs, std::span<const int> labels) {
  require_dims(probs.rows() == labels.size(), "cross_entropy: label count mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < probs.cols(),
            "cross_entropy: label out of range");
    loss -= std::log(std::max(probs(i, labels[i]), 1e-300));
  }
  return loss / static_cast<double>(probs.rows());
}

/// Gradient of mean cross-entropy wrt softmax logits: (p - onehot) / B.
inline Matrix cross_entropy_logit_grad(const Matrix& probs, std::span<const int> labels) {
  Matrix g = probs;
  const double inv_b = 1.0 / static_cast<double>(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    g(i, labels[i]) -= 1.0;
    auto r = g.row(i);
    for (double& v : r) v *= inv_b;
  }
  return g;
}

/// 0.5/B * sum of squared residuals; gradient wrt pred is (pred-target)/B.
inline double mse_loss(const Matrix& pred, const Matrix& target) {
  require_dims(pred.same_shape(target), "mse_loss: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred.data()[k] - target.data()[k];
    s += d * d;
  }
  return 0.5 * s / static_cast<double>(pred.rows());
}

inline Matrix mse_grad(const Matrix& pred, const Matrix& target) {
  Matrix g = pred;
  g -= target;
  g *= 1.0 / static_cast<double>(pred.rows());
  return g;
}

}  // namespace tdal
