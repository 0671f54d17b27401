#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace mhpcg {

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased
double correlation(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);

/// Regularized incomplete gamma functions P(a,x) and Q(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Upper tail of the chi-square distribution with df degrees of freedom.
double chi_square_p_value(double stat, double df);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult two_sample_ks(std::vector<double> a, std::vector<double> b);

/// Empirical quantile (linear interpolation on sorted copy).
double quantile(std::vector<double> x, double prob);

/// Pearson chi-square statistic of observed counts against expected
/// probabilities; returns the p-value with bins-1 degrees of freedom.
double chi_square_gof_p(std::span<const std::int64_t> observed,
                        std::span<const double> expected_prob);

}  // namespace mhpcg
