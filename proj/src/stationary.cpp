#include "stir/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "stir/parallel.hpp"

namespace stir {

namespace {

void check_truncation(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("stick breaking: eps_trunc outside (0,1)");
}

// Breaks `residual` until less than eps remains; appends pieces to `out`.
double break_sticks(Stream& rng, double residual, double eps, std::vector<double>& out) {
  while (residual >= eps) {
    const double w = rng.uniform();
    const double rest = residual * (1.0 - w);
    out.push_back(residual - rest);
    residual = rest;
  }
  return residual;
}

}  // namespace

StickBreaking sample_gem1(Stream& rng, double eps_trunc) {
  check_truncation(eps_trunc);
  StickBreaking out;
  out.remainder = break_sticks(rng, 1.0, eps_trunc, out.masses);
  return out;
}

RealVector sample_pd1(Stream& rng, double eps_trunc) {
  StickBreaking gem = sample_gem1(rng, eps_trunc);
  std::sort(gem.masses.begin(), gem.masses.end(), std::greater<>{});
  return RealVector{0.0, std::move(gem.masses)};
}

Pick size_biased_pick(std::span<const double> masses, double u) {
  const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  if (!(total > 0.0)) throw std::domain_error("size_biased_pick: degenerate partition");
  const double x = u * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] < 0.0) throw std::domain_error("size_biased_pick: negative mass");
    if (masses[i] > 0.0) last_positive = i;
    cumulative += masses[i];
    if (x < cumulative) return {i, masses[i]};
  }
  return {last_positive, masses[last_positive]};
}

Pick size_biased_pick(std::span<const double> masses, Stream& rng) {
  return size_biased_pick(masses, rng.uniform());
}

double ProbabilityPartition::total() const {
  return std::accumulate(tail.begin(), tail.end(), active) + remainder;
}

bool ProbabilityPartition::valid(double tolerance) const {
  if (!(active >= 0.0) || !(remainder >= 0.0)) return false;
  if (std::abs(total() - 1.0) > tolerance) return false;
  for (std::size_t j = 0; j < tail.size(); ++j) {
    if (!(tail[j] > 0.0)) return false;
    if (j + 1 < tail.size() && tail[j] < tail[j + 1]) return false;
  }
  return true;
}

double ProbabilityPartition::largest() const {
  return tail.empty() ? active : std::max(active, tail.front());
}

double ProbabilityPartition::second_largest() const {
  if (tail.empty()) return 0.0;
  if (active >= tail.front()) return tail.front();
  return tail.size() > 1 ? std::max(active, tail[1]) : active;
}

std::size_t ProbabilityPartition::count_above(double threshold) const {
  const auto in_tail = static_cast<std::size_t>(
      std::count_if(tail.begin(), tail.end(), [&](double m) { return m > threshold; }));
  return in_tail + (active > threshold ? 1 : 0);
}

ProbabilityPartition sample_mu(Stream& rng, double eps_trunc) {
  check_truncation(eps_trunc);
  ProbabilityPartition p;
  const double w = rng.uniform();
  p.active = w;
  p.remainder = break_sticks(rng, 1.0 - w, eps_trunc, p.tail);
  std::sort(p.tail.begin(), p.tail.end(), std::greater<>{});
  return p;
}

StepResult split_merge_step(const ProbabilityPartition& p, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("split_merge_step: u outside [0,1]");
  StepResult r{p, StepOutcome::kSplit};
  ProbabilityPartition& q = r.partition;
  if (u <= p.active) {
    const double fragment = p.active - u;
    q.active = u;
    if (fragment > 0.0) {
      auto pos = std::upper_bound(q.tail.begin(), q.tail.end(), fragment, std::greater<>{});
      q.tail.insert(pos, fragment);
    }
    return r;
  }
  double cumulative = p.active;
  for (std::size_t j = 0; j < p.tail.size(); ++j) {
    cumulative += p.tail[j];
    if (u <= cumulative) {
      q.active += q.tail[j];
      q.tail.erase(q.tail.begin() + static_cast<std::ptrdiff_t>(j));
      r.outcome = StepOutcome::kMerge;
      return r;
    }
  }
  r.outcome = StepOutcome::kRemainderHit;
  return r;
}

bool StationarityReport::all_pass() const {
  return std::all_of(statistics.begin(), statistics.end(),
                     [](const StatisticReport& s) { return s.pass; });
}

namespace {

struct Features {
  double active = 0.0;
  double largest = 0.0;
  double second = 0.0;
  double count = 0.0;
  std::uint8_t excluded = 0;
};

Features features_of(const ProbabilityPartition& p) {
  return {p.active, p.largest(), p.second_largest(), static_cast<double>(p.count_above(0.05)), 0};
}

StatisticReport from_gof(std::string name, const GofResult& g) {
  return {std::move(name), g.n_samples, g.statistic, g.threshold, g.pass};
}

}  // namespace

StationarityReport stationarity_experiment(std::size_t replications, std::size_t chain_steps,
                                           std::uint64_t seed, double eps_trunc,
                                           unsigned threads) {
  if (replications < 100) throw std::invalid_argument("stationarity_experiment: too few replications");
  check_truncation(eps_trunc);

  auto fresh = parallel_map(replications, threads, [&](std::size_t r) {
    Stream s = make_stream(seed, r, Purpose::kStationaryFresh);
    return features_of(sample_mu(s, eps_trunc));
  });
  auto evolved = parallel_map(replications, threads, [&](std::size_t r) {
    Stream s = make_stream(seed, r, Purpose::kStationaryEvolved);
    Stream driver = make_stream(seed, r, Purpose::kStationaryDriver);
    ProbabilityPartition p = sample_mu(s, eps_trunc);
    for (std::size_t step = 0; step < chain_steps; ++step) {
      StepResult next = split_merge_step(p, driver.uniform());
      if (next.outcome == StepOutcome::kRemainderHit) {
        Features f{};
        f.excluded = 1;
        return f;
      }
      p = std::move(next.partition);
    }
    return features_of(p);
  });

  StationarityReport report;
  report.replications = replications;
  report.chain_steps = chain_steps;
  report.eps_trunc = eps_trunc;
  report.seed = seed;

  auto column = [](const std::vector<Features>& rows, double Features::*field) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& f : rows) {
      if (!f.excluded) out.push_back(f.*field);
    }
    return out;
  };
  for (const auto& f : evolved) report.remainder_hits += f.excluded;

  const auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const auto fresh_active = column(fresh, &Features::active);
  const auto evolved_active = column(evolved, &Features::active);
  report.statistics.push_back(from_gof("active_uniform_fresh", ks_statistic(fresh_active, uniform_cdf)));
  report.statistics.push_back(
      from_gof("active_uniform_evolved", ks_statistic(evolved_active, uniform_cdf)));
  report.statistics.push_back(from_gof("active_two_sample", two_sample_ks(fresh_active, evolved_active)));

  const auto fresh_largest = column(fresh, &Features::largest);
  const auto evolved_largest = column(evolved, &Features::largest);
  report.statistics.push_back(
      from_gof("largest_two_sample", two_sample_ks(fresh_largest, evolved_largest)));
  report.statistics.push_back(from_gof(
      "second_largest_two_sample",
      two_sample_ks(column(fresh, &Features::second), column(evolved, &Features::second))));
  report.statistics.push_back(from_gof(
      "count_above_0.05_two_sample",
      two_sample_ks(column(fresh, &Features::count), column(evolved, &Features::count))));
  report.fresh_largest = mean_and_variance(fresh_largest);
  report.evolved_largest = mean_and_variance(evolved_largest);
  return report;
}

}  // namespace stir
