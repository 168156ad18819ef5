#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tdal/error.hpp"
#include "tdal/matrix.hpp"

namespace tdal {

/// Feature matrix plus per-row class labels.
struct Dataset {
  Matrix features;               // N x d
  std::vector<int> labels;       // values in [0, class_count)
  std::vector<std::string> class_names;  // optional, per raw class

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  int class_count() const {
    int c = 0;
    for (int y : labels) c = std::max(c, y + 1);
    return c;
  }

  void validate() const {
    require(size() > 0, "Dataset: empty");
    require_dims(features.rows() == labels.size(), "Dataset: feature/label count mismatch");
    for (int y : labels) require(y >= 0, "Dataset: negative label");
    if (!features.all_finite()) throw numeric_error("Dataset: non-finite features");
  }
};

/// Which raw classes the downstream task predicts; everything else collapses
/// into one redundant category when labeled.
struct TaskSpec {
  std::vector<int> target_classes;  // distinct raw class indices, ordered

  int redundant_class_index() const { return static_cast<int>(target_classes.size()); }
  int task_class_count() const { return static_cast<int>(target_classes.size()) + 1; }

  /// Raw class -> task label (target position, or the redundant category).
  int task_label(int raw_class) const {
    for (std::size_t i = 0; i < target_classes.size(); ++i)
      if (target_classes[i] == raw_class) return static_cast<int>(i);
    return redundant_class_index();
  }

  bool is_target_task_label(int task_label_value) const {
    return task_label_value >= 0 && task_label_value < redundant_class_index();
  }

  void validate(int raw_class_count) const {
    require(!target_classes.empty(), "TaskSpec: no target classes");
    for (std::size_t i = 0; i < target_classes.size(); ++i) {
      require(target_classes[i] >= 0 && target_classes[i] < raw_class_count,
              "TaskSpec: target class out of range");
      for (std::size_t j = i + 1; j < target_classes.size(); ++j)
        require(target_classes[i] != target_classes[j], "TaskSpec: duplicate target class");
    }
  }

  bool operator==(const TaskSpec&) const = default;
};

/// Indices with minority classes duplicated cyclically so every class present
/// reaches the majority count. Order is class-major; callers shuffle.
inline std::vector<std::size_t> upsample_balanced(const std::vector<int>& labels) {
  std::vector<std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (static_cast<std::size_t>(labels[i]) >= by_class.size())
      by_class.resize(labels[i] + 1);
    by_class[labels[i]].push_back(i);
  }
  std::size_t majority = 0;
  for (const auto& rows : by_class) majority = std::max(majority, rows.size());
  std::vector<std::size_t> out;
  for (const auto& rows : by_class) {
    if (rows.empty()) continue;
    for (std::size_t k = 0; k < majority; ++k) out.push_back(rows[k % rows.size()]);
  }
  return out;
}

}  // namespace tdal
