#include "stir/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stir/parallel.hpp"
#include "stir/stats.hpp"

namespace stir {

double bernoulli_param_p(std::int64_t i, std::int64_t n) {
  return -std::expm1(-static_cast<double>(2 * i - 1) / (2.0 * static_cast<double>(n)));
}

double bernoulli_param_q(std::int64_t i, std::int64_t n, std::int64_t returns_before) {
  return static_cast<double>(i - returns_before) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Driver

namespace {

std::int64_t discrete_steps(std::int64_t n, double horizon, double root_n) {
  if (n < 1) throw std::invalid_argument("coupling: n must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("coupling: horizon must be positive");
  const auto steps = static_cast<std::int64_t>(std::floor(root_n * horizon));
  // q_i = (i - V)/n must stay a probability.
  if (steps > n)
    throw std::invalid_argument("coupling: floor(sqrt(n) T) exceeds n; increase n or shrink T");
  return steps;
}

}  // namespace

CouplingDriver::CouplingDriver(std::int64_t n, double horizon, std::uint64_t seed,
                               std::uint64_t replication)
    : n_(n),
      clock_([&] {
        Stream s = make_stream(seed, replication, Purpose::kClock);
        return sample_jump_times(horizon, s);
      }()),
      uniforms_(derive_key(seed, {replication, static_cast<std::uint64_t>(Purpose::kSplitMergeUniforms)})),
      corrections_(derive_key(seed, {replication, static_cast<std::uint64_t>(Purpose::kCorrection),
                                     static_cast<std::uint64_t>(n)})),
      root_n_(std::sqrt(static_cast<double>(n))),
      steps_(discrete_steps(n, horizon, root_n_)) {}

CouplingDriver::CouplingDriver(std::int64_t n, JumpClock clock, std::uint64_t uniform_key,
                               std::uint64_t correction_key)
    : n_(n),
      clock_(std::move(clock)),
      uniforms_(uniform_key),
      corrections_(correction_key),
      root_n_(std::sqrt(static_cast<double>(n))),
      steps_(discrete_steps(n, clock_.horizon, root_n_)) {}

double CouplingDriver::uniform(std::int64_t k) const {
  if (k < 1) throw std::out_of_range("CouplingDriver::uniform: index is 1-based");
  return uniforms_.at(static_cast<std::uint64_t>(k - 1));
}

double CouplingDriver::correction_uniform(std::int64_t i) const {
  if (i < 1) throw std::out_of_range("CouplingDriver::correction_uniform: index is 1-based");
  return corrections_.at(static_cast<std::uint64_t>(i - 1));
}

std::vector<double> CouplingDriver::uniforms(std::size_t count) const {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = uniforms_.at(k);
  return out;
}

// ---------------------------------------------------------------------------
// Discrete returns and evolution

DiscreteReturns build_discrete_returns(const CouplingDriver& driver) {
  const std::int64_t n = driver.n();
  const std::int64_t steps = driver.steps();
  const auto& taus = driver.clock().jump_times;

  DiscreteReturns out;
  out.returns.assign(1, 0);
  out.returns.reserve(static_cast<std::size_t>(steps) + 1);
  out.observed.reserve(static_cast<std::size_t>(steps));

  std::size_t next_jump = 0;
  std::int64_t v = 0;
  for (std::int64_t i = 1; i <= steps; ++i) {
    const double right = static_cast<double>(i) / driver.root_n();
    bool x = false;
    while (next_jump < taus.size() && taus[next_jump] <= right) {
      x = true;
      ++next_jump;
    }
    const double p = bernoulli_param_p(i, n);
    const double q = bernoulli_param_q(i, n, v);
    bool y = x;
    if (x && p > q) {
      if (driver.correction_uniform(i) > q / p) {
        y = false;
        out.corrections.push_back({i, CorrectionKind::kSuppress});
      }
    } else if (!x && p < q) {
      if (driver.correction_uniform(i) < (q - p) / (1.0 - p)) {
        y = true;
        out.corrections.push_back({i, CorrectionKind::kAdd});
      }
    }
    out.observed.push_back(x ? 1 : 0);
    v += y ? 1 : 0;
    out.returns.push_back(v);
  }
  return out;
}

std::size_t DiscreteTrajectory::fictive_splits() const {
  return static_cast<std::size_t>(std::count(events.begin(), events.end(), EventKind::kFictive));
}

bool DiscreteTrajectory::mass_identity_holds() const {
  if (states.size() != returns.size()) return false;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].total() != static_cast<std::int64_t>(i) + 1 - returns[i]) return false;
    if (states[i].active < 1 || !states[i].valid()) return false;
  }
  return true;
}

DiscreteTrajectory evolve_coupled_discrete(const CouplingDriver& driver,
                                           const DiscreteReturns& returns) {
  const std::int64_t steps = driver.steps();
  if (static_cast<std::int64_t>(returns.returns.size()) != steps + 1 || returns.returns[0] != 0)
    throw std::invalid_argument("evolve_coupled_discrete: return sequence does not fit the driver");

  DiscreteTrajectory traj;
  traj.returns = returns.returns;
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.events.reserve(static_cast<std::size_t>(steps));
  IntVector state{1, {}};
  traj.states.push_back(state);
  for (std::int64_t i = 1; i <= steps; ++i) {
    const std::int64_t v = returns.returns[static_cast<std::size_t>(i)];
    const std::int64_t dv = v - returns.returns[static_cast<std::size_t>(i - 1)];
    if (dv == 0) {
      ++state.active;
      traj.events.push_back(EventKind::kGrow);
    } else if (dv == 1) {
      traj.events.push_back(apply_return(state, driver.uniform(v)));
    } else {
      throw std::invalid_argument("evolve_coupled_discrete: return increments must be 0 or 1");
    }
    traj.states.push_back(state);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Coupled run and distances

RealVector CoupledRun::discrete_at(double t) const {
  if (!(t >= 0.0 && t <= horizon)) throw std::out_of_range("discrete_at: time outside [0, T]");
  auto i = static_cast<std::size_t>(std::floor(t * root_n));
  i = std::min(i, discrete.states.size() - 1);
  return rescale(discrete.states[i], 1.0 / root_n);
}

double CoupledRun::distance_at(double t) const {
  return distance(continuous.state_at(t), discrete_at(t));
}

CoupledRun run_coupled(const CouplingDriver& driver) {
  CoupledRun run;
  run.n = driver.n();
  run.horizon = driver.horizon();
  run.root_n = driver.root_n();

  DiscreteReturns returns = build_discrete_returns(driver);
  run.discrete = evolve_coupled_discrete(driver, returns);
  run.corrections = std::move(returns.corrections);
  run.continuous = evolve_limit(driver.clock(), driver.uniforms(driver.clock().count()));

  const auto& v = run.discrete.returns;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] != v[i - 1]) run.discrete_jump_times.push_back(static_cast<double>(i) / run.root_n);
  }
  const auto& taus = run.continuous.clock.jump_times;
  run.jump_match = taus.size() == run.discrete_jump_times.size();
  for (std::size_t k = 0; run.jump_match && k < taus.size(); ++k) {
    run.jump_match = std::abs(taus[k] - run.discrete_jump_times[k]) <= 1.0 / run.root_n;
  }
  compute_sup_distances(run);
  return run;
}

void compute_sup_distances(CoupledRun& run) {
  const auto& taus = run.continuous.clock.jump_times;
  const auto& events = run.continuous.events;
  const auto& states = run.discrete.states;
  const auto& v = run.discrete.returns;
  const auto steps = static_cast<std::int64_t>(states.size()) - 1;
  const double scale = 1.0 / run.root_n;
  const double horizon = run.horizon;

  std::size_t applied = 0;  // continuous jumps applied
  std::int64_t step = 0;    // discrete step shown
  double literal = 0.0, matched = 0.0, mass_error = 0.0;

  auto continuous_at = [&](double t) {
    RealVector c = applied == 0 ? RealVector{t, {}} : events[applied - 1].after;
    if (applied > 0) c.active += t - events[applied - 1].time;
    if (t > 0.0) mass_error = std::max(mass_error, std::abs(c.total() - t) / t);
    return c;
  };
  // A piece counts for the matched sup unless exactly one process has
  // applied a jump the other has not yet applied.
  auto piece_aligned = [&] {
    return !run.jump_match || static_cast<std::int64_t>(applied) == v[static_cast<std::size_t>(step)];
  };
  auto visit = [&](double t) {
    const double d = distance(continuous_at(t), rescale(states[static_cast<std::size_t>(step)], scale));
    literal = std::max(literal, d);
    if (piece_aligned()) matched = std::max(matched, d);
  };

  visit(0.0);
  std::size_t next_jump = 0;
  std::int64_t next_grid = 1;
  double last = 0.0;
  while (next_jump < taus.size() || next_grid <= steps) {
    const double grid_time = next_grid <= steps ? static_cast<double>(next_grid) * scale
                                                : std::numeric_limits<double>::infinity();
    const double jump_time =
        next_jump < taus.size() ? taus[next_jump] : std::numeric_limits<double>::infinity();
    const double t = std::min(grid_time, jump_time);
    visit(t);  // left limit at t: the piece before t, with its own counts
    if (jump_time == t) applied = ++next_jump;
    if (grid_time == t) step = next_grid++;
    visit(t);  // value at t
    last = t;
  }
  if (last < horizon) visit(horizon);

  run.sup_distance = literal;
  run.matched_sup_distance = matched;
  run.max_relative_mass_error = mass_error;
}

// ---------------------------------------------------------------------------
// Experiment

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside (0,1]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

namespace {

struct RunSummary {
  double sup = 0.0;
  double matched = 0.0;
  double mass_error = 0.0;
  std::uint8_t corrected = 0;
  std::uint8_t fictive = 0;
  std::uint8_t matched_jumps = 0;
  std::uint8_t identities = 0;
};

}  // namespace

ConvergenceResult convergence_experiment(const std::vector<std::int64_t>& n_list, double horizon,
                                         std::size_t replications, std::uint64_t seed,
                                         unsigned threads) {
  if (n_list.empty()) throw std::invalid_argument("convergence_experiment: empty n list");
  if (replications == 0) throw std::invalid_argument("convergence_experiment: no replications");
  for (auto n : n_list) {
    if (n < 4) throw std::invalid_argument("convergence_experiment: n must be >= 4");
  }

  const std::size_t width = n_list.size();
  // One task per replication; it covers every n so the shared clock is sampled once.
  auto per_rep = parallel_map(replications, threads, [&](std::size_t rep) {
    std::vector<RunSummary> out(width);
    for (std::size_t c = 0; c < width; ++c) {
      const CoupledRun run = run_coupled(CouplingDriver(n_list[c], horizon, seed, rep));
      RunSummary& s = out[c];
      s.sup = run.sup_distance;
      s.matched = run.matched_sup_distance;
      s.mass_error = run.max_relative_mass_error;
      s.corrected = run.corrections.empty() ? 0 : 1;
      s.fictive = run.discrete.fictive_splits() > 0 ? 1 : 0;
      s.matched_jumps = run.jump_match ? 1 : 0;
      s.identities = run.discrete.mass_identity_holds() && run.max_relative_mass_error <= 1e-9 ? 1 : 0;
    }
    return out;
  });

  ConvergenceResult result;
  std::vector<double> xs, medians, matched_medians;
  for (std::size_t c = 0; c < width; ++c) {
    const std::int64_t n = n_list[c];
    const double reps = static_cast<double>(replications);
    const double log_bound = std::log(static_cast<double>(n)) / std::sqrt(static_cast<double>(n));
    std::vector<double> sups, matched;
    ConvergenceRow row;
    row.n = n;
    row.replications = replications;
    row.horizon = horizon;
    row.seed = seed;
    double corrected = 0, fictive = 0, jm = 0, ident = 0, below = 0, matched_below = 0;
    for (const auto& rep : per_rep) {
      const RunSummary& s = rep[c];
      sups.push_back(s.sup);
      matched.push_back(s.matched);
      corrected += s.corrected;
      fictive += s.fictive;
      jm += s.matched_jumps;
      ident += s.identities;
      below += s.sup < log_bound ? 1 : 0;
      matched_below += s.matched < log_bound ? 1 : 0;
      row.max_relative_mass_error = std::max(row.max_relative_mass_error, s.mass_error);
    }
    row.q50 = quantile(sups, 0.5);
    row.q90 = quantile(sups, 0.9);
    row.q99 = quantile(sups, 0.99);
    row.matched_q50 = quantile(matched, 0.5);
    row.matched_q90 = quantile(matched, 0.9);
    row.matched_q99 = quantile(matched, 0.99);
    row.correction_rate = corrected / reps;
    row.fictive_rate = fictive / reps;
    row.jump_match_rate = jm / reps;
    row.mass_identity_rate = ident / reps;
    row.below_log_rate = below / reps;
    row.matched_below_log_rate = matched_below / reps;
    xs.push_back(static_cast<double>(n));
    medians.push_back(row.q50);
    matched_medians.push_back(row.matched_q50);
    result.rows.push_back(row);
  }
  if (xs.size() >= 3) {
    const auto fit = loglog_slope(xs, medians);
    result.slope = fit.slope;
    result.intercept = fit.intercept;
    result.r_squared = fit.r_squared;
    const auto mfit = loglog_slope(xs, matched_medians);
    result.matched_slope = mfit.slope;
    result.matched_intercept = mfit.intercept;
    result.matched_r_squared = mfit.r_squared;
  }
  return result;
}

}  // namespace stir
