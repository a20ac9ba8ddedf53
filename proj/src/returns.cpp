#include "stir/returns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stir/coupling.hpp"
#include "stir/parallel.hpp"
#include "stir/rng.hpp"
#include "stir/stirring.hpp"

namespace stir {

namespace {

constexpr std::int64_t kMarginalLast = 12;
constexpr std::int64_t kMidLast = 7;
constexpr std::int64_t kIncrementLast = 10;

struct Run {
  std::int64_t mid = 0;
  std::int64_t end = 0;
  bool corrected = false;
  bool mass_ok = true;
};

Run direct_run(std::int64_t n, std::int64_t steps, std::int64_t mid, Stream rng) {
  Run r;
  DirectPermutation p(n);
  for (std::int64_t i = 1; i <= steps; ++i) {
    p.step(rng);
    r.mass_ok &= p.visited_places() == i + 1 - p.returns();
    if (i == mid) r.mid = p.returns();
  }
  r.end = p.returns();
  r.mass_ok &= p.cycle_vector().total() == steps + 1 - r.end;
  return r;
}

Run coupled_run(std::int64_t n, double horizon, std::uint64_t seed, std::uint64_t rep,
                std::int64_t mid) {
  const CouplingDriver driver(n, horizon, seed, rep);
  const DiscreteReturns d = build_discrete_returns(driver);
  const bool mass_ok = evolve_coupled_discrete(driver, d).mass_identity_holds();
  return {d.returns[static_cast<std::size_t>(mid)], d.returns.back(), !d.corrections.empty(), mass_ok};
}

}  // namespace

std::string_view to_string(ReturnModel m) {
  return m == ReturnModel::kDirect ? "direct" : "coupled";
}

ReturnSamples sample_returns(std::int64_t n, double horizon, std::size_t replications,
                             std::uint64_t seed, ReturnModel model, unsigned threads) {
  if (n < 1) throw std::invalid_argument("sample_returns: n must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_returns: horizon must be positive");
  if (replications == 0) throw std::invalid_argument("sample_returns: no replications");
  const double root_n = std::sqrt(static_cast<double>(n));
  ReturnSamples s;
  s.model = model;
  s.n = n;
  s.horizon = horizon;
  s.steps = static_cast<std::int64_t>(std::floor(root_n * horizon));
  s.mid_step = static_cast<std::int64_t>(std::floor(root_n * horizon / 2.0));
  if (s.steps > n) throw std::invalid_argument("sample_returns: floor(sqrt(n) T) exceeds n");

  const auto runs = parallel_map(replications, threads, [&](std::size_t rep) {
    if (model == ReturnModel::kDirect)
      return direct_run(n, s.steps, s.mid_step, make_stream(seed, rep, Purpose::kDiscreteChain));
    return coupled_run(n, horizon, seed, rep, s.mid_step);
  });
  s.at_mid.reserve(replications);
  s.at_end.reserve(replications);
  for (const Run& r : runs) {
    s.at_mid.push_back(r.mid);
    s.at_end.push_back(r.end);
    s.runs_with_correction += r.corrected;
    s.mass_identity_failures += !r.mass_ok;
  }
  return s;
}

std::vector<std::uint64_t> histogram(const std::vector<std::int64_t>& values, std::int64_t last) {
  std::vector<std::uint64_t> h(static_cast<std::size_t>(last) + 1, 0);
  for (std::int64_t v : values) {
    if (v < 0) throw std::invalid_argument("histogram: negative value");
    ++h[static_cast<std::size_t>(std::min(v, last))];
  }
  return h;
}

ReturnsLimitReport returns_limit_test(const ReturnSamples& s, double significance) {
  ReturnsLimitReport r;
  const double t_mid = s.horizon / 2.0;
  r.lambda_mid = t_mid * t_mid / 2.0;
  r.lambda_increment = s.horizon * s.horizon / 2.0 - r.lambda_mid;

  r.marginal = chi_square_gof(histogram(s.at_end, kMarginalLast),
                              poisson_categories(s.horizon * s.horizon / 2.0, kMarginalLast),
                              significance);

  const auto pa = poisson_categories(r.lambda_mid, kMidLast);
  const auto pb = poisson_categories(r.lambda_increment, kIncrementLast);
  std::vector<std::uint64_t> cells(pa.size() * pb.size(), 0);
  std::vector<double> expected;
  expected.reserve(cells.size());
  for (double a : pa)
    for (double b : pb) expected.push_back(a * b);
  for (std::size_t k = 0; k < s.at_end.size(); ++k) {
    const auto a = static_cast<std::size_t>(std::min(s.at_mid[k], kMidLast));
    const auto b = static_cast<std::size_t>(std::min(s.at_end[k] - s.at_mid[k], kIncrementLast));
    ++cells[a * pb.size() + b];
  }
  r.joint = chi_square_gof(cells, expected, significance);

  std::vector<double> ends(s.at_end.begin(), s.at_end.end());
  r.end_moments = mean_and_variance(ends);
  return r;
}

}  // namespace stir
