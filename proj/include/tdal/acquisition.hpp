#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "tdal/encoder.hpp"
#include "tdal/error.hpp"
#include "tdal/head.hpp"
#include "tdal/info_scores.hpp"
#include "tdal/matrix.hpp"
#include "tdal/rng.hpp"

namespace tdal {

enum class Strategy { epig, bald, confidence, random };

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::epig: return "epig";
    case Strategy::bald: return "bald";
    case Strategy::confidence: return "confidence";
    case Strategy::random: return "random";
  }
  return "unknown";
}

struct AcquisitionConfig {
  Strategy strategy = Strategy::epig;
  std::size_t realisations = 100;        // K head realisations used by the estimators
  std::size_t target_sample_count = 500; // M target draws for the EPIG estimator
  std::size_t batch_size = 10;           // B_acq
  double power_beta = 4.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(realisations >= 1, "AcquisitionConfig: realisations must be positive");
    require(strategy != Strategy::epig || target_sample_count >= 1,
            "AcquisitionConfig: EPIG needs target samples");
    require(batch_size >= 1, "AcquisitionConfig: batch_size must be positive");
    require(power_beta >= 0.0, "AcquisitionConfig: power_beta must be nonnegative");
  }

  bool operator==(const AcquisitionConfig&) const = default;
};

struct ScoreVector {
  std::vector<double> scores;
  Strategy strategy = Strategy::random;
};

/// Scores every candidate under the configured strategy. Candidates and
/// targets are encoded once; EPIG/BALD/confidence consume the first
/// min(realisations, head members) realisations and use no randomness, the
/// random strategy pre-draws i.i.d. uniform scores from `rng`.
inline ScoreVector score_pool(const HeadPosterior& head, const EncoderModel& encoder,
                              const Matrix& candidates, const Matrix& target_samples,
                              const AcquisitionConfig& cfg, Rng rng) {
  cfg.validate();
  ScoreVector out;
  out.strategy = cfg.strategy;
  out.scores.resize(candidates.rows());
  if (candidates.rows() == 0) return out;

  if (cfg.strategy == Strategy::random) {
    for (double& s : out.scores) s = rng.uniform();
    return out;
  }

  const Matrix zc = encoder.encode_head_input(candidates);
  const MemberProbs cand = head.predict_members(zc, cfg.realisations);

  std::vector<Matrix> targets;
  if (cfg.strategy == Strategy::epig) {
    require(target_samples.rows() >= 1, "score_pool: EPIG needs target samples");
    const std::size_t m = std::min<std::size_t>(cfg.target_sample_count, target_samples.rows());
    Matrix zt = encoder.encode_head_input(target_samples);
    std::vector<std::size_t> first(m);
    for (std::size_t i = 0; i < m; ++i) first[i] = i;
    zt = zt.rows_at(first);
    const MemberProbs tm = head.predict_members(zt, cfg.realisations);
    targets.reserve(m);
    for (std::size_t i = 0; i < m; ++i) targets.push_back(tm.member_matrix(i));
  }

  for (std::size_t i = 0; i < candidates.rows(); ++i) {
    const Matrix members = cand.member_matrix(i);
    double s = 0.0;
    switch (cfg.strategy) {
      case Strategy::epig:
        s = epig(members, targets);
        break;
      case Strategy::bald:
        s = bald(members);
        break;
      case Strategy::confidence:
        s = confidence_score(members);
        break;
      case Strategy::random:
        break;
    }
    out.scores[i] = std::max(0.0, s);  // clear the -1e-12-scale rounding
  }
  return out;
}

}  // namespace tdal
