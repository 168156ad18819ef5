#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "tdal/error.hpp"

namespace tdal {

namespace detail {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based deterministic generator. The output stream is a pure
/// function of (key, counter), so identically seeded generators agree
/// across platforms, and child streams derived by label do not depend on
/// how much the parent has been consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(detail::mix64(seed ^ 0x6A09E667F3BCC909ULL)) {}

  /// Child generator for an independent named stream.
  Rng stream(std::string_view label) const {
    return Rng(key_ ^ detail::mix64(detail::fnv1a(label) * 0x9E3779B97F4A7C15ULL), raw_tag{});
  }

  /// Child generator for an indexed stream family ("tree", i).
  Rng stream(std::string_view label, std::uint64_t index) const {
    std::uint64_t h = detail::fnv1a(label) * 0x9E3779B97F4A7C15ULL;
    h = detail::mix64(h ^ (index + 0xD1B54A32D192ED03ULL));
    return Rng(key_ ^ h, raw_tag{});
  }

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(key_ + counter_);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Marsaglia's polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Unbiased integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    require(n > 0, "Rng::uniform_index: n must be positive");
    const std::uint64_t un = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % un);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    require(k <= n, "Rng::sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + uniform_index(n - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

 private:
  struct raw_tag {};
  Rng(std::uint64_t key, raw_tag) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tdal
