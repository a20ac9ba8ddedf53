#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "stir/rng.hpp"
#include "stir/stirring.hpp"

using namespace stir;

namespace {

// Hand enumeration of the 9 equally likely choice pairs for n = 3:
//   first self (1/3):   self again -> (1), new place (x2) -> (2)
//   first new (2/3):    self -> (2) fictive, other visited -> (1;1) split,
//                       new place -> (3)
const Distribution kThreeTwo{{IntVector{3, {}}, 2.0 / 9.0},
                             {IntVector{2, {}}, 4.0 / 9.0},
                             {IntVector{1, {1}}, 2.0 / 9.0},
                             {IntVector{1, {}}, 1.0 / 9.0}};

Distribution empirical(const std::map<IntVector, int>& counts, int total) {
  Distribution out;
  for (const auto& [k, c] : counts) out[k] = static_cast<double>(c) / total;
  return out;
}

}  // namespace

TEST_CASE("direct model: initial state and self choice") {
  DirectPermutation p(5);
  CHECK(p.cycle_vector() == IntVector{1, {}});
  CHECK(p.visited_places() == 1);
  CHECK(p.apply_choice(1) == EventKind::kFictive);
  CHECK(p.returns() == 1);
  for (std::int64_t place = 1; place <= 5; ++place) CHECK(p.image(place) == place);
  CHECK(p.apply_choice(4) == EventKind::kGrow);
  CHECK(p.position() == 4);
  CHECK(p.image(1) == 4);
  CHECK(p.apply_choice(4) == EventKind::kFictive);  // ball already sits on 4
  CHECK(p.image(1) == 4);
  CHECK(p.returns() == 2);
  CHECK(p.consistent());
}

TEST_CASE("direct model: swapping back splits into touched fixed points") {
  DirectPermutation p(3);
  p.apply_choice(2);
  CHECK(p.cycle_vector() == IntVector{2, {}});
  CHECK(p.apply_choice(1) == EventKind::kSplit);
  CHECK(p.cycle_vector() == IntVector{1, {1}});
  for (std::int64_t place = 1; place <= 3; ++place) CHECK(p.image(place) == place);
}

TEST_CASE("direct model: merge with a touched cycle") {
  DirectPermutation p(10);
  p.apply_choice(2);
  p.apply_choice(3);
  p.apply_choice(4);  // active cycle of length 4
  CHECK(p.apply_choice(2) == EventKind::kSplit);
  const IntVector split = p.cycle_vector();
  CHECK(split.total() == 4);
  CHECK(split.tail.size() == 1);
  // Choosing a place in the detached cycle merges it back.
  std::int64_t detached = 0;
  for (std::int64_t place : {1, 3, 4}) {
    DirectPermutation probe = p;
    if (probe.apply_choice(place) == EventKind::kMerge) detached = place;
  }
  REQUIRE(detached != 0);
  CHECK(p.apply_choice(detached) == EventKind::kMerge);
  CHECK(p.cycle_vector() == IntVector{4, {}});
  CHECK(p.consistent());
}

TEST_CASE("direct model invariants along random trajectories") {
  Stream s(derive_key(21, {}));
  for (std::int64_t n : {2, 3, 7, 30}) {
    for (int run = 0; run < 50; ++run) {
      DirectPermutation p(n);
      std::int64_t v_prev = 0;
      for (int step = 1; step <= 60; ++step) {
        p.step(s);
        const IntVector c = p.cycle_vector();
        CHECK(c.total() == p.step_count() + 1 - p.returns());
        CHECK(c.total() == p.visited_places());
        CHECK(c.valid());
        CHECK(c.active >= 1);
        CHECK(p.returns() - v_prev >= 0);
        CHECK(p.returns() - v_prev <= 1);
        v_prev = p.returns();
      }
      CHECK(p.consistent());
    }
  }
}

TEST_CASE("direct model: n = 2 one step is a fair coin") {
  Stream s(derive_key(22, {}));
  const int draws = 100000;
  int grown = 0;
  for (int i = 0; i < draws; ++i) {
    DirectPermutation p(2);
    p.step(s);
    if (p.cycle_vector() == IntVector{2, {}}) ++grown;
  }
  CHECK(std::abs(grown - draws / 2.0) <= 3.0 * std::sqrt(draws * 0.25));
}

TEST_CASE("direct model: return frequencies follow (i+1-V)/n") {
  // Condition on the visited count before the step; check each bucket at 3 sigma.
  const std::int64_t n = 40;
  Stream s(derive_key(23, {}));
  std::map<std::int64_t, std::pair<int, int>> buckets;  // visited -> (trials, returns)
  for (int run = 0; run < 20000; ++run) {
    DirectPermutation p(n);
    for (int step = 0; step < 12; ++step) {
      const std::int64_t visited = p.visited_places();
      const std::int64_t before = p.returns();
      p.step(s);
      auto& b = buckets[visited];
      ++b.first;
      b.second += static_cast<int>(p.returns() - before);
    }
  }
  for (const auto& [visited, b] : buckets) {
    if (b.first < 500) continue;
    const double q = static_cast<double>(visited) / n;
    CHECK(std::abs(b.second - b.first * q) <= 3.0 * std::sqrt(b.first * q * (1 - q)));
  }
}

TEST_CASE("apply_return: split, fictive and merge") {
  IntVector c{4, {2}};
  // total 6; active covers u*6 in [0,4]
  IntVector a = c;
  CHECK(apply_return(a, 0.5) == EventKind::kSplit);  // floor(3) = 3
  CHECK(a == IntVector{3, {2, 1}});
  IntVector b = c;
  CHECK(apply_return(b, 0.1) == EventKind::kFictive);  // floor(0.6) = 0
  CHECK(b == c);
  IntVector m = c;
  CHECK(apply_return(m, 0.9) == EventKind::kMerge);
  CHECK(m == IntVector{6, {}});
}

TEST_CASE("reduced chain: n = 1 only ever splits fictively") {
  ReducedChainState st(1);
  Stream s(derive_key(24, {}));
  for (int i = 1; i <= 20; ++i) {
    CHECK(step_reduced(st, s) == EventKind::kFictive);
    CHECK(st.returns == i);
    CHECK(st.cycles == IntVector{1, {}});
  }
}

TEST_CASE("reduced chain: mass identity and active never zero") {
  Stream s(derive_key(25, {}));
  for (std::int64_t n : {2, 5, 50, 1000}) {
    for (int run = 0; run < 200; ++run) {
      ReducedChainState st(n);
      for (int step = 0; step < 80; ++step) {
        step_reduced(st, s);
        CHECK(st.cycles.total() == st.step + 1 - st.returns);
        CHECK(st.cycles.active >= 1);
        CHECK(st.cycles.valid());
      }
    }
  }
}

TEST_CASE("exact laws for tiny instances") {
  const Distribution two_one{{IntVector{2, {}}, 0.5}, {IntVector{1, {}}, 0.5}};
  CHECK(total_variation(enumerate_exact(2, 1), two_one) <= 1e-15);
  CHECK(total_variation(reduced_chain_distribution(2, 1), two_one) <= 1e-15);
  CHECK(total_variation(enumerate_exact(3, 2), kThreeTwo) <= 1e-15);
  CHECK(total_variation(reduced_chain_distribution(3, 2), kThreeTwo) <= 1e-15);
  for (std::int64_t n : {1, 4, 100}) {
    const Distribution zero{{IntVector{1, {}}, 1.0}};
    CHECK(enumerate_exact(n, 0) == zero);
    CHECK(reduced_chain_distribution(n, 0) == zero);
  }
  CHECK_THROWS_AS(enumerate_exact(10, 8), std::length_error);
  CHECK_THROWS_AS(enumerate_exact(3, 4, 80), std::length_error);
  CHECK_NOTHROW(enumerate_exact(3, 4, 81));
}

TEST_CASE("direct and reduced laws agree whenever n^steps <= 1e5") {
  for (std::int64_t n = 2; n <= 10; ++n) {
    std::uint64_t paths = 1;
    for (int steps = 1;; ++steps) {
      paths *= static_cast<std::uint64_t>(n);
      if (paths > 100000) break;
      const double tv = total_variation(enumerate_exact(n, steps), reduced_chain_distribution(n, steps));
      CAPTURE(n);
      CAPTURE(steps);
      CHECK(tv <= 1e-12);
    }
  }
}

TEST_CASE("sampled reduced chain matches its exact law") {
  const std::int64_t n = 4;
  const int steps = 5;
  const int draws = 100000;
  Stream s(derive_key(26, {}));
  std::map<IntVector, int> counts;
  for (int i = 0; i < draws; ++i) {
    ReducedChainState st(n);
    for (int k = 0; k < steps; ++k) step_reduced(st, s);
    ++counts[st.cycles];
  }
  CHECK(total_variation(empirical(counts, draws), reduced_chain_distribution(n, steps)) < 0.02);
}

TEST_CASE("sampled direct model matches the n = 3 enumeration") {
  const int draws = 90000;
  Stream s(derive_key(27, {}));
  std::map<IntVector, int> counts;
  for (int i = 0; i < draws; ++i) {
    DirectPermutation p(3);
    p.step(s);
    p.step(s);
    ++counts[p.cycle_vector()];
  }
  for (const auto& [state, prob] : kThreeTwo) {
    CAPTURE(to_string(state));
    CHECK(std::abs(counts[state] - draws * prob) <= 3.0 * std::sqrt(draws * prob * (1 - prob)));
  }
}
