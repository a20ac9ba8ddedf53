#pragma once

// Joint realization of the limit process and the n-th discrete chain.
//
// Both processes read one jump clock and one indexed sequence of uniforms
// U_k. The discrete return counts are obtained by observing the clock on
// intervals of length 1/sqrt(n) and correcting the observed indicator with an
// auxiliary uniform Z_i whenever its Bernoulli parameter differs from the one
// the discrete chain needs.

#include <cstdint>
#include <vector>

#include "stir/limit_process.hpp"
#include "stir/ranked.hpp"
#include "stir/rng.hpp"
#include "stir/stirring.hpp"

namespace stir {

/// P(clock jumps in ((i-1)/sqrt n, i/sqrt n]) = 1 - exp(-(2i-1)/(2n)).
double bernoulli_param_p(std::int64_t i, std::int64_t n);

/// Probability the discrete chain returns at step i: (i - V_{i-1}) / n.
double bernoulli_param_q(std::int64_t i, std::int64_t n, std::int64_t returns_before);

/// Shared randomness for one replication at one population size.
class CouplingDriver {
 public:
  /// Streams are derived from (seed, replication); the clock and the U_k do
  /// not depend on n, so drivers for different n share them.
  CouplingDriver(std::int64_t n, double horizon, std::uint64_t seed, std::uint64_t replication);

  /// Explicit clock and stream keys, for tests.
  CouplingDriver(std::int64_t n, JumpClock clock, std::uint64_t uniform_key,
                 std::uint64_t correction_key);

  std::int64_t n() const noexcept { return n_; }
  double horizon() const noexcept { return clock_.horizon; }
  const JumpClock& clock() const noexcept { return clock_; }
  double root_n() const noexcept { return root_n_; }
  /// floor(sqrt(n) * T): number of discrete steps on [0, T].
  std::int64_t steps() const noexcept { return steps_; }

  /// U_k, 1-based.
  double uniform(std::int64_t k) const;
  /// Z_i^(n), 1-based.
  double correction_uniform(std::int64_t i) const;
  /// U_1..U_count.
  std::vector<double> uniforms(std::size_t count) const;

 private:
  std::int64_t n_;
  JumpClock clock_;
  Stream uniforms_;
  Stream corrections_;
  double root_n_;
  std::int64_t steps_;
};

enum class CorrectionKind { kSuppress, kAdd };

struct Correction {
  std::int64_t step = 0;
  CorrectionKind kind = CorrectionKind::kSuppress;
};

struct DiscreteReturns {
  std::vector<std::int64_t> returns;   // V_0 .. V_steps
  std::vector<std::uint8_t> observed;  // X_1 .. X_steps
  std::vector<Correction> corrections;
};

DiscreteReturns build_discrete_returns(const CouplingDriver& driver);

struct DiscreteTrajectory {
  std::vector<IntVector> states;   // C^(n)(0) .. C^(n)(steps)
  std::vector<EventKind> events;   // events[i-1] happened at step i
  std::vector<std::int64_t> returns;

  std::size_t fictive_splits() const;
  /// Total mass equals i + 1 - V_i at every step.
  bool mass_identity_holds() const;
};

/// Discrete evolution driven by the given return counts and the driver's U_k.
DiscreteTrajectory evolve_coupled_discrete(const CouplingDriver& driver,
                                           const DiscreteReturns& returns);

struct CoupledRun {
  std::int64_t n = 0;
  double horizon = 0.0;
  double root_n = 1.0;
  LimitTrajectory continuous;
  DiscreteTrajectory discrete;
  std::vector<Correction> corrections;
  std::vector<double> discrete_jump_times;  // tau_k^(n) = i / sqrt(n)
  bool jump_match = false;

  /// sup over [0,T] of d(C(t), C^(n)(floor(sqrt(n) t)) / sqrt(n)).
  double sup_distance = 0.0;
  /// Same sup, skipping the stretches between tau_k and tau_k^(n) where one
  /// process has applied its k-th jump and the other has not. Equals
  /// sup_distance when the jumps do not match.
  double matched_sup_distance = 0.0;
  /// Largest |sum C(t) - t| / t over every continuous state the sweep evaluated.
  double max_relative_mass_error = 0.0;

  /// Discrete state at time t, rescaled by 1/sqrt(n).
  RealVector discrete_at(double t) const;
  /// d(C(t), C^(n)(floor(sqrt(n) t)) / sqrt(n)) at a single time.
  double distance_at(double t) const;
};

CoupledRun run_coupled(const CouplingDriver& driver);

/// Exact sup by event-point evaluation (fills the three sup fields of run).
void compute_sup_distances(CoupledRun& run);

inline double sup_distance(const CoupledRun& run) { return run.sup_distance; }

struct ConvergenceRow {
  std::int64_t n = 0;
  std::size_t replications = 0;
  double horizon = 0.0;
  double q50 = 0.0, q90 = 0.0, q99 = 0.0;
  double correction_rate = 0.0;
  double fictive_rate = 0.0;
  double jump_match_rate = 0.0;
  std::uint64_t seed = 0;

  // Diagnostics beyond the table columns.
  double matched_q50 = 0.0, matched_q90 = 0.0, matched_q99 = 0.0;
  double below_log_rate = 0.0;          // fraction with sup < log(n)/sqrt(n)
  double matched_below_log_rate = 0.0;  // same for matched_sup_distance
  double mass_identity_rate = 0.0;      // fraction of runs with both identities intact
  double max_relative_mass_error = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;  // log median sup vs log n
  double matched_slope = 0.0, matched_intercept = 0.0, matched_r_squared = 0.0;
};

ConvergenceResult convergence_experiment(const std::vector<std::int64_t>& n_list, double horizon,
                                         std::size_t replications, std::uint64_t seed,
                                         unsigned threads = 0);

/// Nearest-rank quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

}  // namespace stir
