#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "tdal/power_sampling.hpp"
#include "tdal/rng.hpp"

using namespace tdal;

namespace {

std::vector<double> empirical_pick_frequencies(const std::vector<double>& scores, double beta,
                                               int trials, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> freq(scores.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    auto picks = power_select(scores, 1, beta, rng);
    freq[picks[0]] += 1.0 / trials;
  }
  return freq;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

}  // namespace

TEST_CASE("power_select distributions") {
  SECTION("beta = 0 is uniform") {
    std::vector<double> scores{0.1, 5.0, 2.0, 0.0};
    auto freq = empirical_pick_frequencies(scores, 0.0, 100000, 1);
    std::vector<double> uniform(4, 0.25);
    CHECK(total_variation(freq, uniform) < 0.01);
  }

  SECTION("beta = 1 is proportional") {
    std::vector<double> scores{1.0, 2.0};
    auto freq = empirical_pick_frequencies(scores, 1.0, 100000, 2);
    CHECK_THAT(freq[1], Catch::Matchers::WithinAbs(2.0 / 3.0, 0.01));
  }

  SECTION("beta = 8 concentrates as score^8") {
    std::vector<double> scores{1.0, 1.5, 3.0};
    const double z = 1.0 + std::pow(1.5, 8.0) + std::pow(3.0, 8.0);
    auto freq = empirical_pick_frequencies(scores, 8.0, 100000, 3);
    CHECK_THAT(freq[2], Catch::Matchers::WithinAbs(std::pow(3.0, 8.0) / z, 0.003));
  }

  SECTION("all-zero scores degenerate to uniform") {
    std::vector<double> scores{0.0, 0.0, 0.0};
    auto freq = empirical_pick_frequencies(scores, 4.0, 30000, 4);
    for (double f : freq) CHECK_THAT(f, Catch::Matchers::WithinAbs(1.0 / 3.0, 0.02));
  }

  SECTION("beta = 64 almost always picks the argmax") {
    std::vector<double> scores{0.2, 0.9, 0.5, 0.8999};
    Rng rng(5);
    int argmax_hits = 0;
    for (int t = 0; t < 10000; ++t) {
      auto picks = power_select(scores, 1, 64.0, rng);
      if (picks[0] == 1) ++argmax_hits;
    }
    CHECK(argmax_hits >= 9990);
  }
}

TEST_CASE("power_select batches") {
  SECTION("draws distinct indices without replacement") {
    std::vector<double> scores{5.0, 1.0, 3.0, 2.0, 4.0};
    Rng rng(6);
    for (int t = 0; t < 200; ++t) {
      auto picks = power_select(scores, 5, 2.0, rng);
      REQUIRE(picks.size() == 5);
      CHECK(std::set<std::size_t>(picks.begin(), picks.end()).size() == 5);
    }
  }

  SECTION("renormalizes over the remaining candidates") {
    // with beta large, the batch comes out in descending score order
    std::vector<double> scores{0.1, 0.9, 0.5};
    Rng rng(7);
    auto picks = power_select(scores, 3, 64.0, rng);
    CHECK(picks == std::vector<std::size_t>{1, 2, 0});
  }

  SECTION("deterministic given the generator state") {
    std::vector<double> scores{0.4, 0.6, 0.2, 0.8};
    Rng a(8), b(8);
    CHECK(power_select(scores, 2, 4.0, a) == power_select(scores, 2, 4.0, b));
  }

  SECTION("batch larger than the candidate set errors") {
    std::vector<double> scores{1.0};
    Rng rng(9);
    CHECK_THROWS_AS(power_select(scores, 2, 1.0, rng), value_error);
  }

  SECTION("negative scores error") {
    std::vector<double> scores{0.5, -0.2};
    Rng rng(10);
    CHECK_THROWS_AS(power_select(scores, 1, 1.0, rng), value_error);
  }
}
