#pragma once

// Return counts V at two times, sampled from the direct permutation model or
// from the coupled construction, and their Poisson goodness-of-fit tests.

#include <cstdint>
#include <string_view>
#include <vector>

#include "stir/stats.hpp"

namespace stir {

enum class ReturnModel { kDirect, kCoupled };

std::string_view to_string(ReturnModel m);

struct ReturnSamples {
  ReturnModel model = ReturnModel::kDirect;
  std::int64_t n = 0;
  double horizon = 0.0;
  std::int64_t steps = 0;      // floor(sqrt(n) T)
  std::int64_t mid_step = 0;   // floor(sqrt(n) T / 2)
  std::vector<std::int64_t> at_mid;
  std::vector<std::int64_t> at_end;
  std::size_t runs_with_correction = 0;  // coupled model only
  std::size_t mass_identity_failures = 0;
};

/// One independent run per replication; results are ordered by replication.
ReturnSamples sample_returns(std::int64_t n, double horizon, std::size_t replications,
                             std::uint64_t seed, ReturnModel model, unsigned threads = 0);

/// Counts of {0, ..., last-1, >= last}.
std::vector<std::uint64_t> histogram(const std::vector<std::int64_t>& values, std::int64_t last);

struct ReturnsLimitReport {
  GofResult marginal;  // V at T against Poisson(T^2 / 2)
  GofResult joint;     // (V at T/2, increment) against the product of Poisson laws
  MeanStats end_moments;
  double lambda_mid = 0.0;
  double lambda_increment = 0.0;
  bool pass() const { return marginal.pass && joint.pass; }
};

/// Joint cells are flattened row-major before pooling.
ReturnsLimitReport returns_limit_test(const ReturnSamples& s,
                                      double significance = kDefaultSignificance);

}  // namespace stir
