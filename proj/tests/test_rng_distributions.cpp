#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mhpcg/distributions.hpp"
#include "mhpcg/errors.hpp"
#include "mhpcg/rng.hpp"
#include "mhpcg/stats.hpp"

using namespace mhpcg;

namespace {

// Adaptive Simpson quadrature, the oracle for continuous densities.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; i += 2) s += 4.0 * f(a + i * h);
  for (int i = 2; i < n; i += 2) s += 2.0 * f(a + i * h);
  return s * h / 3.0;
}

struct Moments {
  double mean;
  double var;
  double mu4;  // fourth central moment, for the variance-estimate SE
};

void check_moments(const DistSpec& spec, const Moments& m, int n = 100000) {
  SeededRng rng(20240811, 1);
  std::vector<double> draws(static_cast<std::size_t>(n));
  for (auto& d : draws) {
    const Value v = draw(spec, rng);
    if (const auto* x = std::get_if<double>(&v)) d = *x;
    else d = static_cast<double>(std::get<std::int64_t>(v));
  }
  const double se_mean = std::sqrt(m.var / n);
  CHECK(std::fabs(mean(draws) - m.mean) < 4.0 * se_mean);
  const double se_var = std::sqrt((m.mu4 - m.var * m.var) / n);
  CHECK(std::fabs(variance(draws) - m.var) < 4.0 * se_var);
}

}  // namespace

TEST_CASE("same seed and stream reproduce draws bit for bit") {
  SeededRng a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  CHECK(a.normal() == b.normal());
  CHECK(a.gamma(2.5, 1.3) == b.gamma(2.5, 1.3));
  CHECK(a.poisson(37.0) == b.poisson(37.0));
  SeededRng c(42, 4);
  CHECK(c.next_u64() != SeededRng(42, 3).next_u64());
}

TEST_CASE("gamma draws match closed-form moments") {
  const double k = 3.7, r = 1.9;
  // mu4 of Gamma(k, r): (3k^2 + 6k) / r^4.
  check_moments(DistSpec::gamma(k, r),
                {k / r, k / (r * r), (3 * k * k + 6 * k) / (r * r * r * r)});
}

TEST_CASE("degenerate discrete uniform always returns 1") {
  SeededRng rng(1);
  const DistSpec spec = DistSpec::discrete_uniform(1);
  for (int i = 0; i < 100; ++i) {
    CHECK(std::get<std::int64_t>(draw(spec, rng)) == 1);
  }
}

TEST_CASE("bivariate normal with correlation 0.9 reproduces it empirically") {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.9, 0.9, 1.0;
  const DistSpec spec = DistSpec::mvnormal2(Eigen::Vector2d::Zero(), cov);
  SeededRng rng(5, 0);
  const int n = 100000;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    const auto v = std::get<Eigen::VectorXd>(draw(spec, rng));
    x[static_cast<std::size_t>(i)] = v[0];
    y[static_cast<std::size_t>(i)] = v[1];
  }
  CHECK(std::fabs(correlation(x, y) - 0.9) < 0.01);
}

TEST_CASE("moment checks across the families") {
  check_moments(DistSpec::normal(1.5, 2.0), {1.5, 4.0, 3.0 * 16.0});
  check_moments(DistSpec::poisson(6.5), {6.5, 6.5, 6.5 * (1 + 3 * 6.5)});
  // Binomial(n,p): mu4 = npq(1 + (3n-6)pq).
  {
    const double n = 30, p = 0.3, pq = p * (1 - p);
    check_moments(DistSpec::binomial(30, p), {n * p, n * pq, n * pq * (1 + (3 * n - 6) * pq)});
  }
  {
    // LogNormal(m, s): moments from exp(k m + k^2 s^2 / 2).
    const double m = 0.2, s = 0.4;
    auto raw = [&](double k) { return std::exp(k * m + 0.5 * k * k * s * s); };
    const double mean_ln = raw(1), var_ln = raw(2) - raw(1) * raw(1);
    const double mu4 =
        raw(4) - 4 * raw(3) * raw(1) + 6 * raw(2) * raw(1) * raw(1) - 3 * std::pow(raw(1), 4);
    check_moments(DistSpec::log_normal(m, s), {mean_ln, var_ln, mu4});
  }
  {
    // InvGamma(a, b) with a = 6 so the fourth moment exists.
    const double a = 6.0, b = 2.0;
    auto raw = [&](int k) {
      double num = std::pow(b, k);
      double den = 1.0;
      for (int i = 1; i <= k; ++i) den *= (a - i);
      return num / den;
    };
    const double mean_ig = raw(1), var_ig = raw(2) - raw(1) * raw(1);
    const double mu4 =
        raw(4) - 4 * raw(3) * raw(1) + 6 * raw(2) * raw(1) * raw(1) - 3 * std::pow(raw(1), 4);
    check_moments(DistSpec::inv_gamma(a, b), {mean_ig, var_ig, mu4});
  }
  {
    // DiscreteUniform{1..n}.
    const double n = 12;
    const double mean_du = (n + 1) / 2, var_du = (n * n - 1) / 12;
    // mu4 via direct summation.
    double mu4 = 0;
    for (int k = 1; k <= 12; ++k) mu4 += std::pow(k - mean_du, 4) / n;
    check_moments(DistSpec::discrete_uniform(12), {mean_du, var_du, mu4});
  }
}

TEST_CASE("standard normal log density at zero") {
  CHECK(log_pdf(DistSpec::normal(0, 1), Value{0.0}) ==
        doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("poisson mass sums to one") {
  const double lambda = 17.3;
  const DistSpec spec = DistSpec::poisson(lambda);
  double total = 0.0;
  const int k_max = static_cast<int>(lambda + 40 * std::sqrt(lambda) + 50);
  for (int k = 0; k <= k_max; ++k) {
    total += std::exp(log_pdf(spec, Value{static_cast<std::int64_t>(k)}));
  }
  CHECK(std::fabs(total - 1.0) < 1e-10);
}

TEST_CASE("inverse gamma log density matches the differentiated quadrature CDF") {
  const DistSpec spec = DistSpec::inv_gamma(1.0, 0.25);
  auto pdf = [&](double x) { return std::exp(log_pdf(spec, Value{x})); };
  for (double x : {0.1, 0.25, 0.7, 2.0}) {
    const double h = 1e-4 * x;
    // CDF by quadrature from near zero; differentiate centrally.
    const double lo = 1e-6;
    const double cdf_hi = simpson(pdf, lo, x + h, 40000);
    const double cdf_lo = simpson(pdf, lo, x - h, 40000);
    const double deriv = (cdf_hi - cdf_lo) / (2 * h);
    CHECK(std::fabs(deriv - pdf(x)) < 1e-6);
  }
}

TEST_CASE("continuous families integrate to one on a grid") {
  auto integral = [&](const DistSpec& spec, double lo, double hi) {
    return simpson([&](double x) { return std::exp(log_pdf(spec, Value{x})); }, lo, hi,
                   20000);
  };
  CHECK(std::fabs(integral(DistSpec::normal(0.3, 1.7), -15, 16) - 1.0) < 1e-6);
  CHECK(std::fabs(integral(DistSpec::gamma(2.5, 1.2), 1e-9, 60) - 1.0) < 1e-6);
  CHECK(std::fabs(integral(DistSpec::inv_gamma(3.0, 2.0), 1e-6, 400) - 1.0) < 1e-6);
  CHECK(std::fabs(integral(DistSpec::log_normal(0.1, 0.6), 1e-9, 60) - 1.0) < 1e-6);
}

TEST_CASE("discrete families sum to one") {
  double s = 0;
  for (int k = 0; k <= 30; ++k) {
    s += std::exp(log_pdf(DistSpec::binomial(30, 0.42), Value{static_cast<std::int64_t>(k)}));
  }
  CHECK(std::fabs(s - 1.0) < 1e-12);
  s = 0;
  for (int k = 1; k <= 9; ++k) {
    s += std::exp(log_pdf(DistSpec::discrete_uniform(9), Value{static_cast<std::int64_t>(k)}));
  }
  CHECK(std::fabs(s - 1.0) < 1e-12);
}

TEST_CASE("out-of-support points have zero density") {
  CHECK(log_pdf(DistSpec::gamma(2, 1), Value{-1.0}) == -INFINITY);
  CHECK(log_pdf(DistSpec::poisson(3), Value{std::int64_t{-2}}) == -INFINITY);
  CHECK(log_pdf(DistSpec::binomial(5, 0.5), Value{std::int64_t{6}}) == -INFINITY);
  CHECK(log_pdf(DistSpec::discrete_uniform(4), Value{std::int64_t{0}}) == -INFINITY);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(DistSpec::gamma(0.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(DistSpec::gamma(1.0, -2.0), InvalidParams);
  CHECK_THROWS_AS(DistSpec::binomial(-1, 0.5), InvalidParams);
  CHECK_THROWS_AS(DistSpec::binomial(3, 1.5), InvalidParams);
  CHECK_THROWS_AS(DistSpec::discrete_uniform(0), InvalidParams);
  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;  // not positive definite
  CHECK_THROWS_AS(DistSpec::mvnormal2(Eigen::Vector2d::Zero(), bad), InvalidParams);
}

TEST_CASE("gamma parameterization is (shape, rate)") {
  // Mean k/r distinguishes rate from scale decisively.
  SeededRng rng(9, 9);
  const int n = 200000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += rng.gamma(4.0, 8.0);
  CHECK(std::fabs(s / n - 0.5) < 4.0 * std::sqrt(4.0 / 64.0 / n));
}
