#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/rng.hpp"

namespace tdal {

/// Samples `count` distinct indices sequentially without replacement, each
/// draw with probability proportional to score^beta over the remaining
/// candidates (renormalizing after every draw). beta = 0 and all-zero scores
/// both degenerate to uniform sampling.
inline std::vector<std::size_t> power_select(std::span<const double> scores, std::size_t count,
                                             double beta, Rng& rng) {
  require(count <= scores.size(), "power_select: batch exceeds candidate count");
  require(beta >= 0.0, "power_select: beta must be nonnegative");

  double max_score = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s)) throw value_error("power_select: non-finite score");
    if (s < -1e-9) throw value_error("power_select: negative score");
    max_score = std::max(max_score, s);
  }

  // weights scaled by the max score; proportionality is scale-invariant and
  // this keeps score^beta away from overflow/underflow
  std::vector<double> weights(scores.size());
  if (max_score <= 0.0) {
    std::fill(weights.begin(), weights.end(), 1.0);
  } else {
    for (std::size_t i = 0; i < scores.size(); ++i)
      weights[i] = std::pow(std::max(scores[i], 0.0) / max_score, beta);
  }

  std::vector<bool> taken(scores.size(), false);
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t draw = 0; draw < count; ++draw) {
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (!taken[i]) total += weights[i];

    std::size_t pick = scores.size();
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (taken[i]) continue;
        acc += weights[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      if (pick == scores.size()) {  // u landed on the accumulated total (rounding)
        for (std::size_t i = weights.size(); i-- > 0;)
          if (!taken[i]) {
            pick = i;
            break;
          }
      }
    } else {
      // remaining weights all underflowed; fall back to uniform
      std::size_t remaining = 0;
      for (std::size_t i = 0; i < weights.size(); ++i)
        if (!taken[i]) ++remaining;
      std::size_t step = rng.uniform_index(remaining);
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (taken[i]) continue;
        if (step == 0) {
          pick = i;
          break;
        }
        --step;
      }
    }
    taken[pick] = true;
    out.push_back(pick);
  }
  return out;
}

}  // namespace tdal
