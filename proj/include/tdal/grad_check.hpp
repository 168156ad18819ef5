#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/matrix.hpp"

namespace tdal {

/// Compares analytic gradients against central finite differences.
///
/// `fn` evaluates the loss at the current parameter values and returns
/// {loss, gradients aligned with params}. Returns the max over all
/// parameter entries of |analytic - numeric| / max(1, |analytic|, |numeric|).
template <typename F>
double grad_check(F&& fn, const std::vector<Matrix*>& params, double h = 1e-5) {
  auto [loss, grads] = fn();
  if (!std::isfinite(loss)) throw numeric_error("grad_check: non-finite loss");
  require_dims(grads.size() == params.size(), "grad_check: gradient list mismatch");

  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& w = *params[p];
    require_dims(grads[p].same_shape(w), "grad_check: gradient shape mismatch");
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double saved = w.data()[k];
      w.data()[k] = saved + h;
      const double up = fn().first;
      w.data()[k] = saved - h;
      const double down = fn().first;
      w.data()[k] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw numeric_error("grad_check: non-finite loss under perturbation");
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grads[p].data()[k];
      const double rel = std::abs(analytic - numeric) /
                         std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace tdal
