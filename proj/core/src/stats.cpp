#include "mhpcg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "mhpcg/errors.hpp"

namespace mhpcg {

double mean(std::span<const double> x) {
  if (x.empty()) throw DegenerateSeries("mean of empty series");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw DegenerateSeries("variance needs at least two points");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DegenerateSeries("correlation needs equal-length series");
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateSeries("constant series in correlation");
  return sxy / std::sqrt(sxx * syy);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double gamma_p(double a, double x) { return boost::math::gamma_p(a, x); }
double gamma_q(double a, double x) { return boost::math::gamma_q(a, x); }

double chi_square_p_value(double stat, double df) {
  if (stat <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * stat);
}

namespace {

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult two_sample_ks(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DegenerateSeries("KS needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double ne = std::sqrt(na * nb / (na + nb));
  r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

double quantile(std::vector<double> x, double prob) {
  if (x.empty()) throw DegenerateSeries("quantile of empty series");
  std::sort(x.begin(), x.end());
  const double pos = prob * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * x[lo] + w * x[hi];
}

double chi_square_gof_p(std::span<const std::int64_t> observed,
                        std::span<const double> expected_prob) {
  if (observed.size() != expected_prob.size() || observed.size() < 2) {
    throw std::invalid_argument("chi-square: mismatched bins");
  }
  std::int64_t total = 0;
  for (auto c : observed) total += c;
  double stat = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = expected_prob[k] * static_cast<double>(total);
    if (e <= 0.0) throw std::invalid_argument("chi-square: zero expected count");
    const double d = static_cast<double>(observed[k]) - e;
    stat += d * d / e;
  }
  return chi_square_p_value(stat, static_cast<double>(observed.size() - 1));
}

}  // namespace mhpcg
