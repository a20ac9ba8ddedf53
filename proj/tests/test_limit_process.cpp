#include <doctest.h>

#include <cmath>
#include <vector>

#include "stir/limit_process.hpp"
#include "stir/rng.hpp"
#include "stir/stats.hpp"

using namespace stir;

namespace {

bool close(const RealVector& a, const RealVector& b, double tol = 1e-12) {
  if (a.tail.size() != b.tail.size()) return false;
  if (std::abs(a.active - b.active) > tol) return false;
  for (std::size_t j = 0; j < a.tail.size(); ++j) {
    if (std::abs(a.tail[j] - b.tail[j]) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("time change maps unit arrivals to sqrt(2 Gamma)") {
  const std::vector<double> gammas{0.5, 1.5, 2.5};
  const JumpClock clock = clock_from_unit_arrivals(gammas, 2.0);
  REQUIRE(clock.count() == 2);  // sqrt(5) > 2
  CHECK(clock.jump_times[0] == doctest::Approx(1.0));
  CHECK(clock.jump_times[1] == doctest::Approx(std::sqrt(3.0)));
  CHECK(clock.count_until(1.0) == 1);
  CHECK(clock.count_until(0.99) == 0);
  CHECK_THROWS_AS(clock_from_unit_arrivals(gammas, 0.0), std::invalid_argument);
}

TEST_CASE("sampled clocks are increasing and inside the horizon") {
  Stream s(derive_key(31, {}));
  for (int i = 0; i < 1000; ++i) {
    const JumpClock c = sample_jump_times(3.0, s);
    for (std::size_t k = 0; k < c.count(); ++k) {
      CHECK(c.jump_times[k] > 0.0);
      CHECK(c.jump_times[k] <= 3.0);
      if (k) CHECK(c.jump_times[k] > c.jump_times[k - 1]);
    }
  }
  CHECK_THROWS_AS(sample_jump_times(-1.0, s), std::invalid_argument);
}

TEST_CASE("jump count on [0,2] is Poisson(2)") {
  Stream s(derive_key(32, {}));
  const int reps = 100000;
  std::vector<std::uint64_t> counts(13, 0);
  double sum = 0;
  for (int i = 0; i < reps; ++i) {
    const auto k = sample_jump_times(2.0, s).count();
    sum += static_cast<double>(k);
    ++counts[std::min<std::size_t>(k, 12)];
  }
  CHECK(std::abs(sum / reps - 2.0) <= 3.0 * std::sqrt(2.0 / reps));
  const GofResult g = chi_square_gof(counts, poisson_categories(2.0, 12));
  CAPTURE(g.statistic);
  CHECK(g.pass);
}

TEST_CASE("manual traces") {
  SUBCASE("no jumps is pure drift") {
    const LimitTrajectory traj = evolve_limit(JumpClock{2.0, {}}, {});
    CHECK(traj.state_at(0.0) == RealVector{0.0, {}});
    CHECK(traj.state_at(1.25) == RealVector{1.25, {}});
  }
  SUBCASE("single split") {
    const std::vector<double> u{0.4};
    const LimitTrajectory traj = evolve_limit(JumpClock{2.0, {1.0}}, u);
    REQUIRE(traj.events.size() == 1);
    CHECK(traj.events[0].kind == JumpKind::kSplit);
    CHECK(close(traj.state_before(1.0), RealVector{1.0, {}}));
    CHECK(close(traj.state_at(1.0), RealVector{0.4, {0.6}}));
    CHECK(close(traj.state_at(1.5), RealVector{0.9, {0.6}}));
  }
  SUBCASE("split then merge") {
    const std::vector<double> u{0.4, 0.9};
    const LimitTrajectory traj = evolve_limit(JumpClock{2.0, {1.0, 1.5}}, u);
    CHECK(close(traj.state_before(1.5), RealVector{0.9, {0.6}}));
    CHECK(traj.events[1].kind == JumpKind::kMerge);
    CHECK(traj.events[1].merged == 1);
    CHECK(close(traj.state_at(1.5), RealVector{1.5, {}}));
    CHECK(close(traj.state_at(2.0), RealVector{2.0, {}}));
  }
  CHECK_THROWS_AS(evolve_limit(JumpClock{2.0, {1.0, 1.5}}, std::vector<double>{0.3}),
                  std::invalid_argument);
}

TEST_CASE("state_at is right-continuous and bounded to [0,T]") {
  const std::vector<double> u{0.25};
  const LimitTrajectory traj = evolve_limit(JumpClock{2.0, {1.0}}, u);
  CHECK(close(traj.state_at(1.0), traj.events[0].after));
  CHECK_THROWS_AS(traj.state_at(-0.1), std::out_of_range);
  CHECK_THROWS_AS(traj.state_at(2.1), std::out_of_range);
}

TEST_CASE("random trajectories: mass identity, ranking, first jump splits") {
  Stream clocks(derive_key(33, {}));
  Stream us(derive_key(34, {}));
  Stream probe(derive_key(35, {}));
  const double horizon = 4.0;
  int zero_fragments = 0;
  for (int run = 0; run < 2000; ++run) {
    const JumpClock clock = sample_jump_times(horizon, clocks);
    std::vector<double> u(clock.count());
    for (auto& x : u) x = us.uniform();
    const LimitTrajectory traj = evolve_limit(clock, u);
    if (!traj.events.empty()) CHECK(traj.events.front().kind == JumpKind::kSplit);
    for (const auto& ev : traj.events) {
      CHECK(ev.after.valid());
      CHECK(std::abs(ev.after.total() - ev.time) <= 1e-9 * ev.time);
      if (ev.kind == JumpKind::kSplit && ev.after.active == 0.0) ++zero_fragments;
    }
    for (int i = 0; i < 10; ++i) {
      const double t = probe.uniform() * horizon;
      CHECK(std::abs(traj.state_at(t).total() - t) <= 1e-9 * t);
    }
  }
  CHECK(zero_fragments == 0);
}
