#pragma once

// Split-and-merge on probability partitions with a distinguished active part,
// the GEM(1) / PD(1) samplers, and the measure mu built from them.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stir/ranked.hpp"
#include "stir/rng.hpp"
#include "stir/stats.hpp"

namespace stir {

inline constexpr double kDefaultTruncation = 1e-8;

/// Stick-breaking output: masses in generation order and the unbroken residual.
struct StickBreaking {
  std::vector<double> masses;
  double remainder = 0.0;
};

/// GEM(1): P_j = W_j prod_{i<j} (1 - W_i), stopped once the residual < eps.
StickBreaking sample_gem1(Stream& rng, double eps_trunc = kDefaultTruncation);

/// PD(1): GEM(1) sorted into non-increasing order (active coordinate unused, 0).
RealVector sample_pd1(Stream& rng, double eps_trunc = kDefaultTruncation);

/// Index drawn with probability proportional to mass, using one uniform and
/// cumulative bracketing  sum_{i<I} p_i <= u * total < sum_{i<=I} p_i.
struct Pick {
  std::size_t index;
  double mass;
};
Pick size_biased_pick(std::span<const double> masses, double u);
Pick size_biased_pick(std::span<const double> masses, Stream& rng);

struct ProbabilityPartition {
  double active = 0.0;
  std::vector<double> tail;  // non-increasing, positive
  double remainder = 0.0;    // truncated mass, never selected

  double total() const;
  bool valid(double tolerance = 1e-12) const;
  /// Largest and second-largest components, active included.
  double largest() const;
  double second_largest() const;
  std::size_t count_above(double threshold) const;
};

/// mu: a size-biased part of PD(1) as the active component, the rest ranked.
/// Realized as active = W_1 and the ranked stick-breaking of 1 - W_1.
ProbabilityPartition sample_mu(Stream& rng, double eps_trunc = kDefaultTruncation);

enum class StepOutcome { kSplit, kMerge, kRemainderHit };

struct StepResult {
  ProbabilityPartition partition;
  StepOutcome outcome;
};

/// u <= active splits (new active u); otherwise u merges the tail component
/// whose cumulative bracket contains it. A u inside the truncated remainder
/// leaves the partition unchanged and is reported as kRemainderHit.
StepResult split_merge_step(const ProbabilityPartition& p, double u);

struct StatisticReport {
  std::string name;
  std::size_t n_samples = 0;
  double ks_stat = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct StationarityReport {
  std::size_t replications = 0;
  std::size_t chain_steps = 0;
  double eps_trunc = kDefaultTruncation;
  std::uint64_t seed = 0;
  std::size_t remainder_hits = 0;  // evolved samples excluded from the statistics
  std::vector<StatisticReport> statistics;
  MeanStats fresh_largest;
  MeanStats evolved_largest;

  bool all_pass() const;
};

/// Compares fresh mu samples with independent mu samples evolved for
/// chain_steps split-merge steps.
StationarityReport stationarity_experiment(std::size_t replications, std::size_t chain_steps,
                                           std::uint64_t seed,
                                           double eps_trunc = kDefaultTruncation,
                                           unsigned threads = 0);

}  // namespace stir
