#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/matrix.hpp"

namespace tdal {

/// Adam with bias correction.
class AdamState {
 public:
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;

  template <typename MatrixPtrs>
  AdamState(double lr, const MatrixPtrs& params) : learning_rate(lr) {
    for (const Matrix* p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  }

  std::int64_t steps() const { return step_; }

  /// One update; grads must be aligned with the params the state was built for.
  void step(const std::vector<Matrix*>& params, const std::vector<Matrix*>& grads) {
    require_dims(params.size() == m_.size() && grads.size() == m_.size(),
                 "AdamState::step: parameter list mismatch");
    ++step_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
    for (std::size_t p = 0; p < params.size(); ++p) {
      Matrix& w = *params[p];
      const Matrix& g = *grads[p];
      require_dims(w.same_shape(m_[p]) && g.same_shape(m_[p]),
                   "AdamState::step: shape mismatch");
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double gk = g.data()[k];
        double& mk = m_[p].data()[k];
        double& vk = v_[p].data()[k];
        mk = beta1 * mk + (1.0 - beta1) * gk;
        vk = beta2 * vk + (1.0 - beta2) * gk * gk;
        const double mhat = mk / c1;
        const double vhat = vk / c2;
        w.data()[k] -= learning_rate * mhat / (std::sqrt(vhat) + epsilon);
      }
    }
  }

 private:
  std::int64_t step_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace tdal
