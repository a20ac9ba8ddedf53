#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is addressed by a key derived from
// (master seed, replication, purpose, ...) and a position within the stream.
// Values depend only on their address, never on how many draws were made
// elsewhere, so runs are reproducible regardless of thread count.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace stir {

__extension__ using uint128 = unsigned __int128;

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Folds a list of tags into a stream key.
constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t k = mix64(seed + kGolden);
  for (auto t : tags) k = mix64(k ^ mix64(t + kGolden));
  return k;
}

/// Maps 64 random bits to the open interval (0,1).
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Stream purposes. Part of the key schedule; changing them changes outputs.
enum class Purpose : std::uint64_t {
  kClock = 1,
  kSplitMergeUniforms = 2,
  kCorrection = 3,
  kDiscreteChain = 4,
  kStationaryFresh = 5,
  kStationaryEvolved = 6,
  kStationaryDriver = 7,
  kGeneric = 8,
};

/// A SplitMix64 stream with both sequential and random access.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept { return at_bits(counter_++); }

  /// Bits at absolute position `index`; does not move the cursor.
  constexpr result_type at_bits(std::uint64_t index) const noexcept {
    return mix64(key_ + (index + 1) * kGolden);
  }

  /// Uniform on (0,1) at absolute position `index`.
  constexpr double at(std::uint64_t index) const noexcept { return to_open_unit(at_bits(index)); }

  double uniform() noexcept { return to_open_unit((*this)()); }

  /// Standard exponential by inversion.
  double exponential() noexcept { return -std::log(uniform()); }

  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    uint128 m = static_cast<uint128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<uint128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline Stream make_stream(std::uint64_t seed, std::uint64_t replication, Purpose purpose) {
  return Stream(derive_key(seed, {replication, static_cast<std::uint64_t>(purpose)}));
}

}  // namespace stir
