#pragma once

// The continuous-time split-and-merge limit process C(t).
//
// Jumps arrive as an inhomogeneous Poisson process with intensity t. Between
// jumps the active coordinate grows at unit speed; at the k-th jump the
// uniform U_k selects either a split of the active component or a merge with
// a tail component, exactly as in the discrete chain but without rounding.

#include <cstdint>
#include <span>
#include <vector>

#include "stir/ranked.hpp"
#include "stir/rng.hpp"

namespace stir {

/// Jump times tau_1 < tau_2 < ... <= horizon.
struct JumpClock {
  double horizon = 0.0;
  std::vector<double> jump_times;

  std::size_t count() const noexcept { return jump_times.size(); }
  /// Number of jumps in (0, t].
  std::size_t count_until(double t) const;
};

/// Maps unit-rate arrival times Gamma_k to tau_k = sqrt(2 Gamma_k) and keeps
/// those <= horizon.
JumpClock clock_from_unit_arrivals(std::span<const double> unit_arrivals, double horizon);

/// Samples the clock on (0, T] by time change of a unit Poisson process.
JumpClock sample_jump_times(double horizon, Stream& rng);

enum class JumpKind { kSplit, kMerge };

struct JumpEvent {
  std::size_t k = 0;       // 1-based jump index
  double time = 0.0;       // tau_k
  double uniform = 0.0;    // U_k
  JumpKind kind = JumpKind::kSplit;
  std::size_t merged = 0;  // tail index j for merges
  RealVector after;        // C(tau_k)
};

struct LimitTrajectory {
  JumpClock clock;
  std::vector<JumpEvent> events;

  /// Right-continuous evaluation on [0, horizon].
  RealVector state_at(double t) const;
  /// Left limit C(t-) for t in (0, horizon].
  RealVector state_before(double t) const;
};

/// Deterministic evolution from C(0) = (0; ) given the clock and U_1..U_kappa.
/// Throws std::invalid_argument when fewer uniforms than jumps are supplied.
LimitTrajectory evolve_limit(const JumpClock& clock, std::span<const double> uniforms);

/// Applies one jump to the pre-jump state. Returns the event kind and, for
/// merges, the tail index.
std::pair<JumpKind, std::size_t> apply_limit_jump(RealVector& state, double u);

}  // namespace stir
