#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tdal/acquisition.hpp"
#include "tdal/dataset.hpp"
#include "tdal/encoder.hpp"
#include "tdal/error.hpp"
#include "tdal/finetune.hpp"
#include "tdal/forest.hpp"
#include "tdal/head.hpp"
#include "tdal/laplace_head.hpp"
#include "tdal/messy_pool.hpp"
#include "tdal/pca.hpp"
#include "tdal/power_sampling.hpp"
#include "tdal/split_vae.hpp"

namespace tdal {

struct IdentityEncoderConfig {
  bool operator==(const IdentityEncoderConfig&) const = default;
};

struct PcaConfig {
  std::size_t out_dim = 3;
  bool operator==(const PcaConfig&) const = default;
};

using EncoderSpec = std::variant<IdentityEncoderConfig, PcaConfig, SplitVaeConfig, FineTuneConfig>;
using HeadSpec = std::variant<ForestConfig, LaplaceConfig>;

/// Whether the encoder consumes acquired labels (and therefore refits on the
/// retraining schedule rather than once).
inline bool encoder_is_task_driven(const EncoderSpec& spec) {
  return std::holds_alternative<SplitVaeConfig>(spec) ||
         std::holds_alternative<FineTuneConfig>(spec);
}

struct ALConfig {
  std::size_t budget = 300;
  std::size_t retrain_period = 5;  // k, in acquisition rounds
  EncoderSpec encoder = PcaConfig{};
  HeadSpec head = ForestConfig{};
  AcquisitionConfig acquisition;
  std::size_t initial_per_class = 2;
  std::uint64_t seed = 0;

  void validate() const {
    acquisition.validate();
    require(budget >= acquisition.batch_size, "ALConfig: budget smaller than batch size");
    require(retrain_period >= 1, "ALConfig: retrain_period must be >= 1");
    require(initial_per_class >= 1, "ALConfig: initial_per_class must be >= 1");
  }

  bool operator==(const ALConfig&) const = default;
};

/// Evolving labeled/unlabeled partition of the pool.
struct PoolState {
  std::vector<std::size_t> unlabeled;               // ascending pool indices
  std::vector<std::pair<std::size_t, int>> labeled; // (pool index, task label)
  std::size_t round = 0;
};

struct RoundRecord {
  std::size_t round = 0;
  std::size_t labels = 0;  // labels the evaluated head was trained on
  double accuracy = 0.0;
  std::size_t target_acquired = 0;  // cumulative acquired target-class labels
  bool encoder_retrained = false;
  std::int64_t wall_ms = 0;
};

/// Task label for a pool index. Pool labels are collapsed at construction:
/// target raw classes keep their task position, everything else is the
/// single redundant category. Idempotent.
inline int label_oracle(const PoolSplits& splits, std::size_t index) {
  require(index < splits.pool.size(), "label_oracle: index out of range");
  return splits.pool.labels[index];
}

/// Fraction of test points whose marginal-argmax prediction matches the task
/// label; argmax ties break toward the lowest class index.
inline double evaluate(const HeadPosterior& head, const EncoderModel& encoder,
                       const Dataset& test) {
  require(test.size() > 0, "evaluate: empty test set");
  const Matrix z = encoder.encode_head_input(test.features);
  const Matrix marginal = head.predict_marginal(z);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    auto row = marginal.row(i);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[arg]) arg = c;
    if (static_cast<int>(arg) == test.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

namespace detail {

inline EncoderModel fit_encoder_for_round(const EncoderSpec& spec, const PoolSplits& splits,
                                          const PoolState& state, std::uint64_t run_seed,
                                          std::size_t round, PretrainedAutoencoder& cache) {
  if (std::holds_alternative<IdentityEncoderConfig>(spec))
    return EncoderModel::identity(splits.pool.dim());

  if (const auto* pca_cfg = std::get_if<PcaConfig>(&spec))
    return fit_pca(splits.pool.features, pca_cfg->out_dim);

  std::vector<std::size_t> lab_idx;
  std::vector<int> lab_y;
  lab_idx.reserve(state.labeled.size());
  for (const auto& [idx, y] : state.labeled) {
    lab_idx.push_back(idx);
    lab_y.push_back(y);
  }
  const Matrix lab_x = splits.pool.features.rows_at(lab_idx);
  const int classes = splits.task.task_class_count();

  if (const auto* vae_cfg = std::get_if<SplitVaeConfig>(&spec)) {
    // refit from scratch with a fresh round-derived stream
    SplitVaeConfig cfg = *vae_cfg;
    cfg.seed = Rng(run_seed).stream("td-split-refit", round).next_u64();
    const Matrix unlabeled_x = splits.pool.features.rows_at(state.unlabeled);
    return fit_td_split(unlabeled_x, lab_x, lab_y, classes, cfg);
  }

  FineTuneConfig cfg = std::get<FineTuneConfig>(spec);
  cfg.seed = Rng(run_seed).stream("td-ft").next_u64();
  return fit_td_ft(splits.pool.features, lab_x, lab_y, classes, cfg, cache);
}

inline HeadPosterior fit_head_for_round(const HeadSpec& spec, const Matrix& z,
                                        const std::vector<int>& y, std::size_t classes,
                                        std::uint64_t run_seed, std::size_t round) {
  if (const auto* forest_cfg = std::get_if<ForestConfig>(&spec)) {
    ForestConfig cfg = *forest_cfg;
    cfg.seed = Rng(run_seed).stream("head-fit", round).next_u64();
    return HeadPosterior(fit_forest(z, y, classes, cfg));
  }
  LaplaceConfig cfg = std::get<LaplaceConfig>(spec);
  cfg.seed = Rng(run_seed).stream("head-fit", round).next_u64();
  return HeadPosterior(fit_laplace(z, y, classes, cfg));
}

}  // namespace detail

/// The acquisition loop: per round, (re)fit the encoder on schedule, refit
/// the head from scratch, score the remaining pool, power-sample a batch,
/// query the oracle, evaluate on the test set, and record metrics. Fully
/// deterministic given cfg.seed (wall_ms aside).
inline std::vector<RoundRecord> run_active_learning(const PoolSplits& splits,
                                                    const ALConfig& cfg) {
  cfg.validate();
  require(splits.pool.size() > 0, "run_active_learning: empty pool");
  require(splits.test.size() > 0, "run_active_learning: empty test set");

  Rng root(cfg.seed);

  std::vector<std::size_t> initial = splits.initial_labeled;
  if (initial.empty())
    initial = sample_initial_labeled(splits, cfg.initial_per_class,
                                     root.stream("init-labels").next_u64());

  PoolState state;
  {
    std::vector<bool> is_labeled(splits.pool.size(), false);
    for (std::size_t idx : initial) {
      require(idx < splits.pool.size() && !is_labeled[idx],
              "run_active_learning: bad initial labeled index");
      is_labeled[idx] = true;
      state.labeled.emplace_back(idx, label_oracle(splits, idx));
    }
    for (std::size_t i = 0; i < splits.pool.size(); ++i)
      if (!is_labeled[i]) state.unlabeled.push_back(i);
  }

  const std::size_t batch = cfg.acquisition.batch_size;
  const std::size_t rounds = (cfg.budget + batch - 1) / batch;
  const bool task_driven = encoder_is_task_driven(cfg.encoder);
  const std::size_t classes = splits.task.task_class_count();

  std::vector<RoundRecord> records;
  records.reserve(rounds);
  EncoderModel encoder;
  PretrainedAutoencoder pretrain_cache;
  std::size_t acquired = 0;
  std::size_t target_acquired = 0;

  for (std::size_t round = 1; round <= rounds; ++round) {
    const auto t0 = std::chrono::steady_clock::now();
    state.round = round;

    bool retrained = false;
    const bool on_schedule = (round - 1) % cfg.retrain_period == 0;
    if ((task_driven && on_schedule) || (!task_driven && round == 1)) {
      try {
        encoder =
            detail::fit_encoder_for_round(cfg.encoder, splits, state, cfg.seed, round,
                                          pretrain_cache);
      } catch (const error& e) {
        throw error("round " + std::to_string(round) + ": encoder fit failed: " + e.what());
      }
      retrained = true;
    }

    std::vector<std::size_t> lab_idx;
    std::vector<int> lab_y;
    for (const auto& [idx, y] : state.labeled) {
      lab_idx.push_back(idx);
      lab_y.push_back(y);
    }
    const std::size_t labels_at_fit = lab_idx.size();
    HeadPosterior head;
    try {
      const Matrix z = encoder.encode_head_input(splits.pool.features.rows_at(lab_idx));
      head = detail::fit_head_for_round(cfg.head, z, lab_y, classes, cfg.seed, round);
    } catch (const error& e) {
      throw error("round " + std::to_string(round) + ": head fit failed: " + e.what());
    }

    const Matrix candidates = splits.pool.features.rows_at(state.unlabeled);
    const ScoreVector scores = score_pool(head, encoder, candidates, splits.target_samples,
                                          cfg.acquisition, root.stream("score", round));

    const std::size_t take =
        std::min({batch, cfg.budget - acquired, state.unlabeled.size()});
    Rng select_rng = root.stream("select", round);
    const auto picks = power_select(scores.scores, take, cfg.acquisition.power_beta, select_rng);

    std::vector<std::size_t> picked_pool_indices;
    picked_pool_indices.reserve(picks.size());
    for (std::size_t pos : picks) picked_pool_indices.push_back(state.unlabeled[pos]);
    for (std::size_t idx : picked_pool_indices) {
      const int y = label_oracle(splits, idx);
      state.labeled.emplace_back(idx, y);
      if (splits.task.is_target_task_label(y)) ++target_acquired;
    }
    {
      std::vector<std::size_t> sorted_picks(picks.begin(), picks.end());
      std::sort(sorted_picks.begin(), sorted_picks.end());
      for (std::size_t i = sorted_picks.size(); i-- > 0;)
        state.unlabeled.erase(state.unlabeled.begin() +
                              static_cast<std::ptrdiff_t>(sorted_picks[i]));
    }
    acquired += picks.size();

    const double accuracy = evaluate(head, encoder, splits.test);

    RoundRecord rec;
    rec.round = round;
    rec.labels = labels_at_fit;
    rec.accuracy = accuracy;
    rec.target_acquired = target_acquired;
    rec.encoder_retrained = retrained;
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    records.push_back(rec);

    if (state.unlabeled.empty()) break;  // pool exhausted; stop after recording
  }
  return records;
}

}  // namespace tdal
