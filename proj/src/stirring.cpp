#include "stir/stirring.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace stir {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kGrow: return "grow";
    case EventKind::kSplit: return "split";
    case EventKind::kFictive: return "fictive";
    case EventKind::kMerge: return "merge";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// DirectPermutation

DirectPermutation::DirectPermutation(std::int64_t n) : n_(n) {
  if (n < 1) throw std::invalid_argument("DirectPermutation: n must be >= 1");
  local_.emplace(1, 0);
  place_of_.push_back(1);
  perm_.push_back(0);
  inv_.push_back(0);
  label_.push_back(0);
  cycle_size_.push_back(1);
}

std::uint32_t DirectPermutation::local_id(std::int64_t place) {
  auto [it, inserted] = local_.try_emplace(place, static_cast<std::uint32_t>(place_of_.size()));
  if (inserted) {
    const std::uint32_t id = it->second;
    place_of_.push_back(place);
    perm_.push_back(id);
    inv_.push_back(id);
    label_.push_back(static_cast<std::uint32_t>(cycle_size_.size()));
    cycle_size_.push_back(1);
  }
  return it->second;
}

EventKind DirectPermutation::apply_choice(std::int64_t place) {
  if (place < 1 || place > n_) throw std::out_of_range("apply_choice: place outside [1, n]");
  ++step_;
  const bool seen = local_.contains(place);
  if (seen) ++returns_;
  const std::uint32_t x = local_id(place);
  const std::uint32_t b = position_;
  if (x == b) return EventKind::kFictive;

  const std::uint32_t lx = label_[x];
  const std::uint32_t lb = label_[b];
  const bool merging = lx != lb;
  if (merging) {
    // Relabel the smaller cycle by walking it before the permutation changes.
    const bool keep_x = cycle_size_[lx] >= cycle_size_[lb];
    const std::uint32_t keep = keep_x ? lx : lb;
    const std::uint32_t drop = keep_x ? lb : lx;
    const std::uint32_t start = keep_x ? b : x;
    std::uint32_t cur = start;
    do {
      label_[cur] = keep;
      cur = perm_[cur];
    } while (cur != start);
    cycle_size_[keep] += cycle_size_[drop];
    cycle_size_[drop] = 0;
  }

  // New permutation is (b x) o perm: ball 1 (local 0) moves to x, the ball
  // that was on x moves to b.
  const std::uint32_t other = inv_[x];
  perm_[0] = x;
  perm_[other] = b;
  inv_[x] = 0;
  inv_[b] = other;
  position_ = x;
  if (merging) return seen ? EventKind::kMerge : EventKind::kGrow;

  // Split: the cycle through ball 1 gets a fresh label.
  const auto fresh = static_cast<std::uint32_t>(cycle_size_.size());
  std::int64_t len = 0;
  std::uint32_t cur = 0;
  do {
    label_[cur] = fresh;
    ++len;
    cur = perm_[cur];
  } while (cur != 0);
  cycle_size_.push_back(len);
  cycle_size_[lb] -= len;
  return EventKind::kSplit;
}

EventKind DirectPermutation::step(Stream& rng) {
  return apply_choice(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n_))) + 1);
}

IntVector DirectPermutation::cycle_vector() const {
  const std::uint32_t active_label = label_[0];
  std::vector<std::int64_t> tail;
  for (std::size_t l = 0; l < cycle_size_.size(); ++l) {
    if (l != active_label && cycle_size_[l] > 0) tail.push_back(cycle_size_[l]);
  }
  std::sort(tail.begin(), tail.end(), std::greater<>{});
  return {cycle_size_[active_label], std::move(tail)};
}

std::int64_t DirectPermutation::image(std::int64_t place) const {
  if (place < 1 || place > n_) throw std::out_of_range("image: place outside [1, n]");
  auto it = local_.find(place);
  return it == local_.end() ? place : place_of_[perm_[it->second]];
}

bool DirectPermutation::consistent() const {
  const std::size_t m = place_of_.size();
  if (perm_.size() != m || inv_.size() != m || label_.size() != m) return false;
  if (place_of_[perm_[0]] != position()) return false;
  std::vector<std::int64_t> sizes(cycle_size_.size(), 0);
  std::vector<bool> hit(m, false);
  for (std::size_t id = 0; id < m; ++id) {
    if (perm_[id] >= m || inv_[perm_[id]] != id || hit[perm_[id]]) return false;
    hit[perm_[id]] = true;
    if (label_[perm_[id]] != label_[id]) return false;
    ++sizes[label_[id]];
  }
  // A label is one cycle: walking from any member covers exactly its size.
  for (std::size_t id = 0; id < m; ++id) {
    std::int64_t len = 0;
    std::uint32_t cur = static_cast<std::uint32_t>(id);
    do {
      ++len;
      cur = perm_[cur];
    } while (cur != id);
    if (len != cycle_size_[label_[id]]) return false;
  }
  if (sizes != cycle_size_) return false;
  return static_cast<std::int64_t>(m) == step_ + 1 - returns_;
}

// ---------------------------------------------------------------------------
// Reduced chain

EventKind apply_return(IntVector& cycles, double u) {
  const auto [j, scaled] = select_component_scaled(cycles, u);
  if (j >= 1) {
    merge_into_active(cycles, j);
    return EventKind::kMerge;
  }
  const auto kept = static_cast<std::int64_t>(std::floor(scaled));
  if (kept == 0) return EventKind::kFictive;
  const std::int64_t fragment = cycles.active - kept;
  cycles.active = kept;
  insert_ranked_inplace(cycles, fragment);
  return EventKind::kSplit;
}

EventKind step_reduced(ReducedChainState& state, Stream& rng) {
  const std::int64_t visited = state.step + 1 - state.returns;
  ++state.step;
  if (static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(state.n))) >= visited) {
    ++state.cycles.active;
    return EventKind::kGrow;
  }
  ++state.returns;
  return apply_return(state.cycles, rng.uniform());
}

// ---------------------------------------------------------------------------
// Exact laws

Distribution enumerate_exact(std::int64_t n, int steps, std::uint64_t budget) {
  if (n < 1 || steps < 0) throw std::invalid_argument("enumerate_exact: need n >= 1, steps >= 0");
  std::uint64_t paths = 1;
  for (int s = 0; s < steps; ++s) {
    if (paths > budget / static_cast<std::uint64_t>(n))
      throw std::length_error("enumerate_exact: n^steps exceeds budget " + std::to_string(budget));
    paths *= static_cast<std::uint64_t>(n);
  }
  const double weight = 1.0 / static_cast<double>(paths);

  Distribution out;
  std::function<void(const DirectPermutation&, int)> walk = [&](const DirectPermutation& state,
                                                                int depth) {
    if (depth == steps) {
      out[state.cycle_vector()] += weight;
      return;
    }
    for (std::int64_t place = 1; place <= n; ++place) {
      DirectPermutation next = state;
      next.apply_choice(place);
      walk(next, depth + 1);
    }
  };
  walk(DirectPermutation(n), 0);
  return out;
}

Distribution reduced_chain_distribution(std::int64_t n, int steps) {
  if (n < 1 || steps < 0)
    throw std::invalid_argument("reduced_chain_distribution: need n >= 1, steps >= 0");
  // Visited count is a function of the state (its total mass), so the
  // cycle vector alone is a sufficient state.
  Distribution current{{IntVector{1, {}}, 1.0}};
  for (int s = 0; s < steps; ++s) {
    Distribution next;
    for (const auto& [cycles, p] : current) {
      const std::int64_t total = cycles.total();
      const double p_return = static_cast<double>(total) / static_cast<double>(n);
      if (p_return < 1.0) {
        IntVector grown = cycles;
        ++grown.active;
        next[grown] += p * (1.0 - p_return);
      }
      // All breakpoints of apply_return in u are multiples of 1/total.
      for (std::int64_t m = 0; m < total; ++m) {
        IntVector after = cycles;
        apply_return(after, (static_cast<double>(m) + 0.5) / static_cast<double>(total));
        next[after] += p * p_return / static_cast<double>(total);
      }
    }
    current = std::move(next);
  }
  return current;
}

double total_variation(const Distribution& a, const Distribution& b) {
  double sum = 0.0;
  for (const auto& [k, p] : a) {
    auto it = b.find(k);
    sum += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, p] : b) {
    if (!a.contains(k)) sum += p;
  }
  return 0.5 * sum;
}

}  // namespace stir
