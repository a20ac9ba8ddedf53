#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "stir/returns.hpp"

using namespace stir;

TEST_CASE("histogram folds the tail") {
  const std::vector<std::int64_t> v{0, 1, 1, 5, 9};
  CHECK(histogram(v, 3) == std::vector<std::uint64_t>{1, 2, 0, 2});
  CHECK_THROWS_AS(histogram(std::vector<std::int64_t>{-1}, 3), std::invalid_argument);
}

TEST_CASE("sampled return counts follow the exact finite-n law") {
  for (ReturnModel model : {ReturnModel::kDirect, ReturnModel::kCoupled}) {
    const ReturnSamples s = sample_returns(400, 2.0, 20000, 61, model, 1);
    CAPTURE(to_string(model));
    CHECK(s.steps == 40);
    CHECK(s.mid_step == 20);
    CHECK(s.mass_identity_failures == 0);
    for (std::size_t k = 0; k < s.at_end.size(); ++k) CHECK(s.at_mid[k] <= s.at_end[k]);
    const GofResult g =
        chi_square_gof(histogram(s.at_end, 10), oracle::fold(oracle::return_count_law(400, 40), 10));
    CAPTURE(g.statistic);
    CHECK(g.pass);
    if (model == ReturnModel::kDirect) CHECK(s.runs_with_correction == 0);
  }
}

TEST_CASE("return samples do not depend on the thread count") {
  const ReturnSamples a = sample_returns(100, 2.0, 3000, 62, ReturnModel::kDirect, 1);
  const ReturnSamples b = sample_returns(100, 2.0, 3000, 62, ReturnModel::kDirect, 3);
  CHECK(a.at_end == b.at_end);
  CHECK(a.at_mid == b.at_mid);
  CHECK_THROWS_AS(sample_returns(4, 3.0, 10, 1, ReturnModel::kDirect), std::invalid_argument);
}

TEST_CASE("Poisson report on exact Poisson counts") {
  // Counts built to match Poisson(0.5) x Poisson(1.5) proportions closely.
  ReturnSamples s;
  s.n = 10000;
  s.horizon = 2.0;
  const std::vector<double> pa = poisson_categories(0.5, 7), pb = poisson_categories(1.5, 10);
  for (std::size_t a = 0; a < 7; ++a)
    for (std::size_t b = 0; b < 10; ++b) {
      const auto count = static_cast<int>(pa[a] * pb[b] * 200000 + 0.5);
      for (int c = 0; c < count; ++c) {
        s.at_mid.push_back(static_cast<std::int64_t>(a));
        s.at_end.push_back(static_cast<std::int64_t>(a + b));
      }
    }
  const ReturnsLimitReport r = returns_limit_test(s);
  CHECK(r.lambda_mid == doctest::Approx(0.5));
  CHECK(r.lambda_increment == doctest::Approx(1.5));
  CHECK(r.joint.pass);
  CHECK(r.marginal.pass);
  CHECK(r.end_moments.mean == doctest::Approx(2.0).epsilon(1e-3));
}
