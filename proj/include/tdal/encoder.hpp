#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/matrix.hpp"
#include "tdal/mlp.hpp"

namespace tdal {

struct IdentityEncoder {
  std::size_t dim = 0;
};

struct PcaEncoder {
  std::vector<double> mean;  // length d
  Matrix components;         // d x out_dim, columns are principal directions
};

/// Split-latent VAE encoder; encode() is the posterior mean, and only the
/// first `classified_dim` coordinates feed the prediction head.
struct SplitVaeEncoder {
  Mlp net;  // d -> ... -> 2*latent_dim (mu, logvar)
  std::size_t latent_dim = 0;
  std::size_t classified_dim = 0;
};

/// Fine-tuned MLP encoder (autoencoder pretrain + supervised fine-tune).
struct FineTuneEncoder {
  Mlp net;  // d -> ... -> representation
};

/// The fitted representation map g. Immutable after fit; encode is pure.
class EncoderModel {
 public:
  enum class Variant { identity, pca, td_split, td_ft };

  EncoderModel() = default;

  static EncoderModel identity(std::size_t dim) {
    EncoderModel m;
    m.variant_ = Variant::identity;
    m.output_dim_ = dim;
    m.head_begin_ = 0;
    m.head_end_ = dim;
    m.impl_ = IdentityEncoder{dim};
    return m;
  }

  static EncoderModel pca(PcaEncoder enc) {
    EncoderModel m;
    m.variant_ = Variant::pca;
    m.output_dim_ = enc.components.cols();
    m.head_begin_ = 0;
    m.head_end_ = m.output_dim_;
    m.impl_ = std::move(enc);
    return m;
  }

  static EncoderModel td_split(SplitVaeEncoder enc) {
    require(enc.classified_dim >= 1 && enc.classified_dim <= enc.latent_dim,
            "EncoderModel: classified_dim out of range");
    EncoderModel m;
    m.variant_ = Variant::td_split;
    m.output_dim_ = enc.latent_dim;
    m.head_begin_ = 0;
    m.head_end_ = enc.classified_dim;
    m.impl_ = std::move(enc);
    return m;
  }

  static EncoderModel td_ft(FineTuneEncoder enc) {
    EncoderModel m;
    m.variant_ = Variant::td_ft;
    m.output_dim_ = enc.net.output_dim();
    m.head_begin_ = 0;
    m.head_end_ = m.output_dim_;
    m.impl_ = std::move(enc);
    return m;
  }

  Variant variant() const { return variant_; }
  std::size_t output_dim() const { return output_dim_; }
  std::size_t head_input_begin() const { return head_begin_; }
  std::size_t head_input_end() const { return head_end_; }
  std::size_t head_input_dim() const { return head_end_ - head_begin_; }

  Matrix encode(const Matrix& x) const {
    if (const auto* id = std::get_if<IdentityEncoder>(&impl_)) {
      require_dims(x.cols() == id->dim, "EncoderModel::encode: dimension mismatch");
      return x;
    }
    if (const auto* p = std::get_if<PcaEncoder>(&impl_)) {
      require_dims(x.cols() == p->mean.size(), "EncoderModel::encode: dimension mismatch");
      Matrix centered = x;
      for (std::size_t i = 0; i < centered.rows(); ++i) {
        auto r = centered.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] -= p->mean[j];
      }
      return matmul(centered, p->components);
    }
    if (const auto* v = std::get_if<SplitVaeEncoder>(&impl_)) {
      // posterior mean: first latent_dim outputs of the (mu, logvar) net
      return v->net(x).columns(0, v->latent_dim);
    }
    const auto& ft = std::get<FineTuneEncoder>(impl_);
    return ft.net(x);
  }

  /// Encoded coordinates the prediction head consumes.
  Matrix encode_head_input(const Matrix& x) const {
    Matrix z = encode(x);
    if (head_begin_ == 0 && head_end_ == z.cols()) return z;
    return z.columns(head_begin_, head_end_);
  }

  const IdentityEncoder* as_identity() const { return std::get_if<IdentityEncoder>(&impl_); }
  const PcaEncoder* as_pca() const { return std::get_if<PcaEncoder>(&impl_); }
  const SplitVaeEncoder* as_td_split() const { return std::get_if<SplitVaeEncoder>(&impl_); }
  const FineTuneEncoder* as_td_ft() const { return std::get_if<FineTuneEncoder>(&impl_); }

  static std::string variant_name(Variant v) {
    switch (v) {
      case Variant::identity: return "identity";
      case Variant::pca: return "pca";
      case Variant::td_split: return "td_split";
      case Variant::td_ft: return "td_ft";
    }
    return "unknown";
  }

 private:
  Variant variant_ = Variant::identity;
  std::size_t output_dim_ = 0;
  std::size_t head_begin_ = 0;
  std::size_t head_end_ = 0;
  std::variant<IdentityEncoder, PcaEncoder, SplitVaeEncoder, FineTuneEncoder> impl_;
};

}  // namespace tdal
