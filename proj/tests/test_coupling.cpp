#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "oracles.hpp"
#include "stir/coupling.hpp"
#include "stir/stats.hpp"

using namespace stir;

TEST_CASE("bernoulli parameters") {
  // Closed forms evaluated independently: 1 - e^{-1/200}, 1 - e^{-19/200}.
  CHECK(bernoulli_param_p(1, 100) == doctest::Approx(0.00498752080731768).epsilon(1e-12));
  CHECK(bernoulli_param_p(10, 100) == doctest::Approx(0.09062706553176858).epsilon(1e-12));
  for (std::int64_t n : {10, 100, 10000}) {
    const double rn = std::sqrt(static_cast<double>(n));
    for (std::int64_t i = 1; i <= 20; ++i) {
      auto lambda = [](double t) { return 0.5 * t * t; };
      const double void_prob = 1.0 - std::exp(-(lambda(i / rn) - lambda((i - 1) / rn)));
      CHECK(bernoulli_param_p(i, n) == doctest::Approx(void_prob).epsilon(1e-12));
    }
  }
  CHECK(bernoulli_param_q(5, 100, 1) == doctest::Approx(0.04));
  CHECK(bernoulli_param_q(1, 37, 0) == doctest::Approx(1.0 / 37));
  for (std::int64_t i = 1; i <= 10; ++i) {
    for (std::int64_t v = 0; v < i; ++v) {
      const double q = bernoulli_param_q(i, 100, v);
      CHECK(q >= 1.0 / 100 - 1e-15);
      CHECK(q <= i / 100.0 + 1e-15);
    }
  }
}

TEST_CASE("driver validation") {
  CHECK_THROWS_AS(CouplingDriver(4, 3.0, 1, 0), std::invalid_argument);  // floor(2*3) > 4
  CHECK_THROWS_AS(CouplingDriver(100, 0.0, 1, 0), std::invalid_argument);
  const CouplingDriver d(100, 2.0, 1, 0);
  CHECK(d.steps() == 20);
  CHECK_THROWS_AS(d.uniform(0), std::out_of_range);
}

TEST_CASE("drivers for different n share clock and uniforms") {
  const CouplingDriver a(100, 2.0, 9, 3), b(10000, 2.0, 9, 3), c(100, 2.0, 9, 4);
  CHECK(a.clock().jump_times == b.clock().jump_times);
  CHECK(a.uniform(1) == b.uniform(1));
  CHECK(a.uniform(5) == b.uniform(5));
  CHECK(a.correction_uniform(1) != b.correction_uniform(1));
  CHECK(a.uniform(1) != c.uniform(1));
}

TEST_CASE("without clock jumps only add-corrections raise V") {
  for (std::uint64_t key = 0; key < 200; ++key) {
    const CouplingDriver d(100, JumpClock{2.0, {}}, derive_key(key, {1}), derive_key(key, {2}));
    const DiscreteReturns r = build_discrete_returns(d);
    std::vector<std::int64_t> added;
    for (const auto& c : r.corrections) {
      CHECK(c.kind == CorrectionKind::kAdd);
      added.push_back(c.step);
    }
    for (std::int64_t i = 1; i <= d.steps(); ++i) {
      const auto dv = r.returns[static_cast<std::size_t>(i)] - r.returns[static_cast<std::size_t>(i - 1)];
      const bool was_added = std::find(added.begin(), added.end(), i) != added.end();
      CHECK(dv == (was_added ? 1 : 0));
    }
  }
}

TEST_CASE("coupled returns follow the return-chain law") {
  const std::int64_t n = 100;
  const int runs = 100000;
  std::map<std::pair<std::int64_t, std::int64_t>, std::pair<double, double>> buckets;  // (i, V_{i-1}) -> (trials, hits)
  std::vector<std::uint64_t> final_counts(12, 0);
  for (int rep = 0; rep < runs; ++rep) {
    const CouplingDriver d(n, 2.0, 5, static_cast<std::uint64_t>(rep));
    const DiscreteReturns r = build_discrete_returns(d);
    for (std::int64_t i = 1; i <= d.steps(); ++i) {
      auto& b = buckets[{i, r.returns[static_cast<std::size_t>(i - 1)]}];
      b.first += 1;
      b.second += static_cast<double>(r.returns[static_cast<std::size_t>(i)] -
                                      r.returns[static_cast<std::size_t>(i - 1)]);
    }
    ++final_counts[std::min<std::size_t>(static_cast<std::size_t>(r.returns.back()), 11)];
  }
  // Aggregate z^2 over well-populated buckets against chi-square.
  double z2 = 0.0;
  std::size_t used = 0;
  std::vector<std::pair<double, double>> largest;
  for (const auto& [key, b] : buckets) {
    const double q = bernoulli_param_q(key.first, n, key.second);
    if (b.first < 1000 || q * b.first < 10) continue;
    const double z = (b.second - b.first * q) / std::sqrt(b.first * q * (1 - q));
    z2 += z * z;
    ++used;
    if (key.second == 0) CHECK(std::abs(z) <= 3.0);  // the heaviest buckets, one per step
  }
  CHECK(used >= 20);
  CHECK(z2 < chi_square_quantile(1e-3, used));

  const GofResult g = chi_square_gof(final_counts, oracle::fold(oracle::return_count_law(n, 20), 11));
  CAPTURE(g.statistic);
  CHECK(g.pass);
}

TEST_CASE("coupled discrete trajectories") {
  for (std::uint64_t rep = 0; rep < 300; ++rep) {
    const CouplingDriver d(400, 2.0, 17, rep);
    const DiscreteReturns r = build_discrete_returns(d);
    const DiscreteTrajectory traj = evolve_coupled_discrete(d, r);
    CHECK(traj.mass_identity_holds());
    // Before the first return the active cycle is i + 1.
    for (std::size_t i = 0; i < traj.states.size() && r.returns[i] == 0; ++i)
      CHECK(traj.states[i] == IntVector{static_cast<std::int64_t>(i) + 1, {}});
    // A return at step i uses U_{V_i}: replaying apply_return reproduces the state.
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
      if (r.returns[i] == r.returns[i - 1]) continue;
      IntVector replay = traj.states[i - 1];
      CHECK(apply_return(replay, d.uniform(r.returns[i])) == traj.events[i - 1]);
      CHECK(replay == traj.states[i]);
    }
  }
  const CouplingDriver d(400, 2.0, 17, 0);
  DiscreteReturns bad = build_discrete_returns(d);
  bad.returns.pop_back();
  CHECK_THROWS_AS(evolve_coupled_discrete(d, bad), std::invalid_argument);
}

TEST_CASE("continuous part equals a standalone limit run") {
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const CouplingDriver d(1000, 2.0, 23, rep);
    const CoupledRun run = run_coupled(d);
    const LimitTrajectory alone = evolve_limit(d.clock(), d.uniforms(d.clock().count()));
    REQUIRE(run.continuous.events.size() == alone.events.size());
    for (std::size_t k = 0; k < alone.events.size(); ++k) {
      CHECK(run.continuous.events[k].after == alone.events[k].after);
      CHECK(run.continuous.events[k].time == alone.events[k].time);
    }
  }
}

TEST_CASE("sup distance without jumps") {
  // Discrete (i+1; )/sqrt(n) against continuous (t; ): sup is 1/sqrt(n) at grid points.
  int checked = 0;
  for (std::uint64_t key = 0; key < 50; ++key) {
    const CouplingDriver d(10000, JumpClock{2.0, {}}, derive_key(key, {3}), derive_key(key, {4}));
    const CoupledRun run = run_coupled(d);
    if (!run.corrections.empty()) continue;
    ++checked;
    CHECK(run.sup_distance == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(run.sup_distance <= 2.0 / 100.0);
    CHECK(run.jump_match);
  }
  CHECK(checked > 30);
}

TEST_CASE("event-point sup against dense grid evaluation") {
  const double h = 1e-3;
  int compared = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const std::int64_t n = rep % 2 ? 100 : 2500;
    const CoupledRun run = run_coupled(CouplingDriver(n, 2.0, 29, rep));
    CHECK(run.sup_distance >= 1.0 / run.root_n - 1e-12);
    CHECK(run.matched_sup_distance <= run.sup_distance);
    double grid_max = 0.0;
    for (int s = 0; s * h <= run.horizon; ++s) grid_max = std::max(grid_max, run.distance_at(s * h));
    // Every grid value is attained by the path, so it can never exceed the sup.
    CHECK(grid_max <= run.sup_distance + 1e-12);
    // A grid of spacing h only sees stretches at least h long; runs whose jump
    // misalignment windows are shorter are skipped for the upper comparison.
    bool short_window = false;
    const auto& taus = run.continuous.clock.jump_times;
    for (std::size_t k = 0; k < std::min(taus.size(), run.discrete_jump_times.size()); ++k)
      short_window |= std::abs(taus[k] - run.discrete_jump_times[k]) < 2 * h;
    if (short_window) continue;
    ++compared;
    CHECK(run.sup_distance <= grid_max + 2 * h);
  }
  CHECK(compared >= 85);
}

TEST_CASE("median sup shrinks with n only after excluding misalignment windows") {
  const ConvergenceResult r = convergence_experiment({100, 10000}, 2.0, 1000, 31, 1);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[1].matched_q50 < r.rows[0].matched_q50);
  CHECK(r.rows[1].jump_match_rate > r.rows[0].jump_match_rate);
  CHECK(r.rows[1].correction_rate < r.rows[0].correction_rate);
  for (const auto& row : r.rows) CHECK(row.mass_identity_rate == 1.0);
  // The literal sup keeps an O(1) spike between each continuous jump and the
  // grid point where the discrete chain catches up.
  CHECK(r.rows[1].q50 > 0.1);
}

TEST_CASE("experiment determinism across thread counts") {
  const ConvergenceResult a = convergence_experiment({16, 100, 400}, 2.0, 64, 77, 1);
  const ConvergenceResult b = convergence_experiment({16, 100, 400}, 2.0, 64, 77, 4);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].q50 == b.rows[i].q50);
    CHECK(a.rows[i].q99 == b.rows[i].q99);
    CHECK(a.rows[i].correction_rate == b.rows[i].correction_rate);
  }
  CHECK(a.slope == b.slope);
  CHECK_THROWS_AS(convergence_experiment({2}, 2.0, 10, 1), std::invalid_argument);
}

TEST_CASE("nearest-rank quantile") {
  CHECK(quantile({5, 1, 3, 2, 4}, 0.5) == 3);
  CHECK(quantile({5, 1, 3, 2, 4}, 1.0) == 5);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2);
  CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
}
