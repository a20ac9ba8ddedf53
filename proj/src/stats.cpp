#include "stir/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace stir {

double poisson_pmf(double lambda, std::int64_t k) {
  if (!(lambda > 0.0)) throw std::invalid_argument("poisson_pmf: lambda must be positive");
  if (k < 0) return 0.0;
  const double kk = static_cast<double>(k);
  return std::exp(-lambda + kk * std::log(lambda) - std::lgamma(kk + 1.0));
}

std::vector<double> poisson_categories(double lambda, std::int64_t last) {
  if (last < 1) throw std::invalid_argument("poisson_categories: need at least one open category");
  std::vector<double> probs;
  double head = 0.0;
  for (std::int64_t k = 0; k < last; ++k) {
    probs.push_back(poisson_pmf(lambda, k));
    head += probs.back();
  }
  probs.push_back(std::max(0.0, 1.0 - head));
  return probs;
}

double chi_square_quantile(double significance, std::size_t dof) {
  if (dof == 0) throw std::invalid_argument("chi_square_quantile: zero degrees of freedom");
  boost::math::chi_squared law(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(law, significance));
}

GofResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected,
                         double significance) {
  if (observed.size() != expected.size())
    throw std::invalid_argument("chi_square_gof: observed and expected sizes differ");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  if (total < 1000.0) throw std::invalid_argument("chi_square_gof: fewer than 1000 observations");
  const double mass = std::accumulate(expected.begin(), expected.end(), 0.0);
  if (std::abs(mass - 1.0) > 1e-9)
    throw std::invalid_argument("chi_square_gof: expected probabilities do not sum to 1");

  std::vector<double> obs_bins, exp_bins;
  double obs_acc = 0.0, exp_acc = 0.0;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    obs_acc += static_cast<double>(observed[c]);
    exp_acc += expected[c] * total;
    if (exp_acc >= 5.0) {
      obs_bins.push_back(obs_acc);
      exp_bins.push_back(exp_acc);
      obs_acc = exp_acc = 0.0;
    }
  }
  if (obs_acc > 0.0 || exp_acc > 0.0) {
    if (exp_bins.empty()) {
      obs_bins.push_back(obs_acc);
      exp_bins.push_back(exp_acc);
    } else {
      obs_bins.back() += obs_acc;
      exp_bins.back() += exp_acc;
    }
  }
  if (exp_bins.size() < 2)
    throw std::invalid_argument("chi_square_gof: a single pooled bin leaves no degrees of freedom");

  GofResult r;
  for (std::size_t b = 0; b < exp_bins.size(); ++b) {
    const double diff = obs_bins[b] - exp_bins[b];
    r.statistic += diff * diff / exp_bins[b];
  }
  r.degrees_of_freedom = exp_bins.size() - 1;
  r.threshold = chi_square_quantile(significance, r.degrees_of_freedom);
  r.pass = r.statistic < r.threshold;
  r.n_samples = static_cast<std::size_t>(total);
  return r;
}

double ks_critical_constant(double significance) {
  if (!(significance > 0.0 && significance < 1.0))
    throw std::invalid_argument("ks: significance outside (0,1)");
  return std::sqrt(-0.5 * std::log(0.5 * significance));
}

GofResult ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf,
                       double significance) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  if (samples.size() < 100) throw std::invalid_argument("ks_statistic: fewer than 100 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, above - f, f - below});
  }
  GofResult r;
  r.statistic = d;
  r.threshold = ks_critical_constant(significance) / std::sqrt(n);
  r.pass = r.statistic < r.threshold;
  r.n_samples = sorted.size();
  return r;
}

GofResult two_sample_ks(std::span<const double> a, std::span<const double> b, double significance) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two_sample_ks: empty sample");
  if (a.size() < 100 || b.size() < 100)
    throw std::invalid_argument("two_sample_ks: fewer than 100 samples per side");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    // Advance past every copy of the smallest remaining value on both sides.
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  GofResult r;
  r.statistic = d;
  r.threshold = ks_critical_constant(significance) * std::sqrt((nx + ny) / (nx * ny));
  r.pass = r.statistic < r.threshold;
  r.n_samples = x.size() + y.size();
  return r;
}

LinearFit loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("loglog_slope: need at least 3 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument("loglog_slope: values must be positive");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: all x values equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

MeanStats mean_and_variance(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_and_variance: empty sample");
  MeanStats s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(values.size() - 1);
  }
  return s;
}

}  // namespace stir
