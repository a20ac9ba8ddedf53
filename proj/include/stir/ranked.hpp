#pragma once

// Ranked mass vectors: an active component plus a non-increasing tail.
//
// Two flavors share the interface: integer masses for the discrete chains
// and real masses for the limit process and the probability simplex.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace stir {

template <typename Mass>
struct RankedMassVector {
  static_assert(std::is_arithmetic_v<Mass>);
  using mass_type = Mass;

  Mass active{};
  std::vector<Mass> tail;  // nonzero entries only, non-increasing

  RankedMassVector() = default;
  RankedMassVector(Mass a, std::vector<Mass> t) : active(a), tail(std::move(t)) {}

  /// Coordinate j, with 0 the active component and zeros past the support.
  Mass operator[](std::size_t j) const {
    if (j == 0) return active;
    return j - 1 < tail.size() ? tail[j - 1] : Mass{};
  }

  /// Number of explicitly stored coordinates (active + nonzero tail).
  std::size_t size() const noexcept { return tail.size() + 1; }

  Mass total() const { return std::accumulate(tail.begin(), tail.end(), active); }

  bool valid() const {
    if (active < Mass{}) return false;
    for (std::size_t j = 0; j < tail.size(); ++j) {
      if (!(tail[j] > Mass{})) return false;
      if (j + 1 < tail.size() && tail[j] < tail[j + 1]) return false;
    }
    return true;
  }

  friend bool operator==(const RankedMassVector&, const RankedMassVector&) = default;
  friend auto operator<=>(const RankedMassVector&, const RankedMassVector&) = default;
};

using IntVector = RankedMassVector<std::int64_t>;
using RealVector = RankedMassVector<double>;

/// Builds a vector from arbitrary-order tail entries, dropping zeros.
template <typename Mass>
RankedMassVector<Mass> make_ranked(Mass active, std::vector<Mass> tail) {
  if (active < Mass{}) throw std::invalid_argument("make_ranked: negative active mass");
  std::erase_if(tail, [](Mass m) {
    if (m < Mass{}) throw std::invalid_argument("make_ranked: negative tail mass");
    return m == Mass{};
  });
  std::stable_sort(tail.begin(), tail.end(), std::greater<>{});
  return {active, std::move(tail)};
}

/// sup_k |sum_{j<=k} a_j - sum_{j<=k} b_j| with coordinate 0 the active one.
template <typename Mass>
double distance(const RankedMassVector<Mass>& a, const RankedMassVector<Mass>& b) {
  const std::size_t len = std::max(a.size(), b.size());
  double sa = 0.0, sb = 0.0, best = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    sa += static_cast<double>(a[j]);
    sb += static_cast<double>(b[j]);
    best = std::max(best, std::abs(sa - sb));
  }
  return best;
}

/// Coordinatewise rescaling into the real flavor.
template <typename Mass>
RealVector rescale(const RankedMassVector<Mass>& v, double factor) {
  RealVector out;
  out.active = static_cast<double>(v.active) * factor;
  out.tail.reserve(v.tail.size());
  for (Mass m : v.tail) out.tail.push_back(static_cast<double>(m) * factor);
  return out;
}

/// Index j with  sum_{m<j} v_m < x <= sum_{m<=j} v_m, where x = u * total.
/// j == 0 selects the active component (split), j >= 1 a tail component (merge).
/// The scaled position x is returned alongside so callers reuse one product.
struct Selection {
  std::size_t index;
  double scaled;  // u * total
};

template <typename Mass>
Selection select_component_scaled(const RankedMassVector<Mass>& v, double u) {
  const double total = static_cast<double>(v.total());
  if (!(total > 0.0)) throw std::domain_error("select_component: empty partition");
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("select_component: u outside [0,1]");
  const double x = u * total;
  double cumulative = static_cast<double>(v.active);
  if (x <= cumulative) return {0, x};
  std::size_t last_nonzero = 0;
  for (std::size_t j = 0; j < v.tail.size(); ++j) {
    cumulative += static_cast<double>(v.tail[j]);
    last_nonzero = j + 1;
    if (x <= cumulative) return {j + 1, x};
  }
  // Rounding pushed x past the final cumulative sum; only reachable for u ~ 1.
  return {last_nonzero, x};
}

template <typename Mass>
std::size_t select_component(const RankedMassVector<Mass>& v, double u) {
  return select_component_scaled(v, u).index;
}

/// Inserts `mass` into the tail; equal masses keep insertion order (new goes last).
template <typename Mass>
void insert_ranked_inplace(RankedMassVector<Mass>& v, Mass mass) {
  if (mass < Mass{}) throw std::invalid_argument("insert_ranked: negative mass");
  if (mass == Mass{}) return;
  auto pos = std::upper_bound(v.tail.begin(), v.tail.end(), mass, std::greater<>{});
  v.tail.insert(pos, mass);
}

template <typename Mass>
RankedMassVector<Mass> insert_ranked(RankedMassVector<Mass> v, Mass mass) {
  insert_ranked_inplace(v, mass);
  return v;
}

/// Removes tail component j (1-based); later components shift down by one.
template <typename Mass>
Mass remove_tail_component_inplace(RankedMassVector<Mass>& v, std::size_t j) {
  if (j == 0 || j > v.tail.size())
    throw std::out_of_range("remove_tail_component: index " + std::to_string(j) +
                            " outside nonzero support of size " + std::to_string(v.tail.size()));
  const Mass removed = v.tail[j - 1];
  v.tail.erase(v.tail.begin() + static_cast<std::ptrdiff_t>(j - 1));
  return removed;
}

template <typename Mass>
std::pair<RankedMassVector<Mass>, Mass> remove_tail_component(RankedMassVector<Mass> v,
                                                              std::size_t j) {
  Mass removed = remove_tail_component_inplace(v, j);
  return {std::move(v), removed};
}

/// Moves tail component j into the active one.
template <typename Mass>
void merge_into_active(RankedMassVector<Mass>& v, std::size_t j) {
  v.active += remove_tail_component_inplace(v, j);
}

std::string to_string(const IntVector& v);
std::string to_string(const RealVector& v);

}  // namespace stir
