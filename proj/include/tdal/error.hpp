#pragma once

#include <stdexcept>
#include <string>

namespace tdal {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape/contract violations (mismatched matrix dimensions etc).
struct dimension_error : error {
  using error::error;
};

/// Invalid argument values or violated preconditions.
struct value_error : error {
  using error::error;
};

/// File and stream failures (missing file, bad magic, truncation).
struct io_error : error {
  using error::error;
};

/// Malformed config files, CSV rows, manifests.
struct parse_error : error {
  using error::error;
};

/// NaN/Inf where a finite value is required.
struct numeric_error : error {
  using error::error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw value_error(msg);
}

inline void require_dims(bool cond, const std::string& msg) {
  if (!cond) throw dimension_error(msg);
}

}  // namespace tdal
