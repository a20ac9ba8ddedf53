#pragma once

// The discrete random-stirring process.
//
// DirectPermutation applies the transpositions themselves and tracks cycles;
// ReducedChainState evolves only the ranked cycle lengths and the return
// count. The exact routines enumerate both models for small n so their laws
// can be compared without sampling error.

#include <cstdint>
#include <map>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stir/ranked.hpp"
#include "stir/rng.hpp"

namespace stir {

enum class EventKind { kGrow, kSplit, kFictive, kMerge };

std::string_view to_string(EventKind kind);

/// One row of a trajectory dump.
struct StepRecord {
  std::int64_t step = 0;
  std::int64_t returns = 0;
  EventKind event = EventKind::kGrow;
  IntVector state;
};

/// Permutation of {1..n} built by stirring ball 1.
///
/// Only visited places are stored. They get compact local ids in order of
/// first visit; every unvisited place is a fixed point of the permutation.
/// Each local id carries a cycle label so merges and splits are
/// O(cycle length).
class DirectPermutation {
 public:
  explicit DirectPermutation(std::int64_t n);

  /// Transposes the stirring ball with the ball on `place` (1-based).
  /// Choosing the ball's own place applies the identity.
  EventKind apply_choice(std::int64_t place);

  /// One step with a uniformly chosen place.
  EventKind step(Stream& rng);

  /// Active cycle length and ranked lengths of the other touched cycles.
  IntVector cycle_vector() const;

  std::int64_t n() const noexcept { return n_; }
  std::int64_t step_count() const noexcept { return step_; }
  std::int64_t returns() const noexcept { return returns_; }
  std::int64_t visited_places() const noexcept { return static_cast<std::int64_t>(place_of_.size()); }
  /// Current place of the stirring ball.
  std::int64_t position() const noexcept { return place_of_[position_]; }
  bool visited(std::int64_t place) const { return local_.contains(place); }

  /// Image of `place` under the permutation.
  std::int64_t image(std::int64_t place) const;

  /// Full consistency check of the internal bookkeeping (tests only; O(visited)).
  bool consistent() const;

 private:
  std::uint32_t local_id(std::int64_t place);

  std::int64_t n_;
  std::int64_t step_ = 0;
  std::int64_t returns_ = 0;
  std::uint32_t position_ = 0;  // local id of the stirring ball's place

  std::unordered_map<std::int64_t, std::uint32_t> local_;
  std::vector<std::int64_t> place_of_;
  std::vector<std::uint32_t> perm_;
  std::vector<std::uint32_t> inv_;
  std::vector<std::uint32_t> label_;
  std::vector<std::int64_t> cycle_size_;  // by label; zero once a label is retired
};

/// Reduced chain: ranked cycle lengths plus the return count.
struct ReducedChainState {
  std::int64_t n = 1;
  IntVector cycles{1, {}};
  std::int64_t step = 0;
  std::int64_t returns = 0;

  ReducedChainState() = default;
  explicit ReducedChainState(std::int64_t population) : n(population) {}
};

/// Split-or-merge on a return, driven by one uniform.
///
/// Selects a component with `u`. A split sets the active mass to
/// floor(u * total) and ranks the remainder of the old active cycle into the
/// tail; floor(u * total) == 0 is a fictive split and leaves the state alone.
EventKind apply_return(IntVector& cycles, double u);

/// One step of the reduced chain: a return with probability
/// (step + 1 - returns) / n, otherwise the active cycle grows by one.
EventKind step_reduced(ReducedChainState& state, Stream& rng);

/// Exact law over ranked cycle vectors after a fixed number of steps.
using Distribution = std::map<IntVector, double>;

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

/// Enumerates all n^steps equally likely choice sequences of the direct model.
Distribution enumerate_exact(std::int64_t n, int steps,
                             std::uint64_t budget = kDefaultEnumerationBudget);

/// Propagates the reduced chain's law exactly. Return outcomes are
/// enumerated over the intervals of u on which apply_return is constant.
Distribution reduced_chain_distribution(std::int64_t n, int steps);

double total_variation(const Distribution& a, const Distribution& b);

}  // namespace stir
