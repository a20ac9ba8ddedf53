#pragma once

// Goodness-of-fit tests and rate fitting for the verification harness.
// Every test reports its statistic together with the rejection threshold at
// the declared significance; pass means statistic < threshold.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stir {

inline constexpr double kDefaultSignificance = 1e-3;

struct GofResult {
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t n_samples = 0;
  std::size_t degrees_of_freedom = 0;  // chi-square only
};

/// e^-lambda lambda^k / k!, evaluated in log space.
double poisson_pmf(double lambda, std::int64_t k);

/// Probabilities of {0, 1, ..., last-1, >= last} under Poisson(lambda).
std::vector<double> poisson_categories(double lambda, std::int64_t last);

/// Pearson chi-square test of category counts against category probabilities.
///
/// Categories are pooled left to right until each pooled expected count is at
/// least 5; a leftover group with a smaller count joins the last pooled bin.
/// Requires at least 1000 observations and two pooled bins.
GofResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected,
                         double significance = kDefaultSignificance);

/// Upper critical value of the chi-square law.
double chi_square_quantile(double significance, std::size_t dof);

/// Asymptotic Kolmogorov constant c(alpha) = sqrt(-log(alpha / 2) / 2).
double ks_critical_constant(double significance);

/// One-sample Kolmogorov-Smirnov test against a continuous cdf.
GofResult ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf,
                       double significance = kDefaultSignificance);

/// Two-sample Kolmogorov-Smirnov test; ties are handled exactly.
GofResult two_sample_ks(std::span<const double> a, std::span<const double> b,
                        double significance = kDefaultSignificance);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log y on log x.
LinearFit loglog_slope(std::span<const double> xs, std::span<const double> ys);

struct MeanStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

MeanStats mean_and_variance(std::span<const double> values);

}  // namespace stir
