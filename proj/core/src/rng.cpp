#include "mhpcg/rng.hpp"

#include <cmath>

#include "mhpcg/errors.hpp"

namespace mhpcg {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  // Mix seed and stream through SplitMix64 so that nearby (seed, stream)
  // pairs give unrelated states.
  std::uint64_t x = seed;
  (void)splitmix64(x);
  x ^= 0xd1b54a32d192ed03ULL * (stream + 1);
  for (auto& w : state_) w = splitmix64(x);
  if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
    state_[0] = 1;
  }
}

SeededRng SeededRng::for_chain(std::uint64_t master_seed, std::uint64_t chain_index) {
  std::uint64_t h = master_seed;
  (void)splitmix64(h);
  h ^= chain_index;
  return SeededRng(master_seed, splitmix64(h));
}

std::uint64_t SeededRng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw InvalidParams("below: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x < limit) return x % n;
  }
}

double SeededRng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw InvalidParams("gamma: shape and rate must be positive");
  }
  if (shape < 1.0) {
    // Boost by one and correct with a power of a uniform.
    const double u = 1.0 - uniform();  // (0, 1]
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

double SeededRng::inv_gamma(double shape, double scale) {
  return 1.0 / gamma(shape, scale);
}

std::int64_t SeededRng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw InvalidParams("poisson: mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Multiplication method.
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double p = 1.0;
    for (;;) {
      p *= 1.0 - uniform();
      if (p <= limit) return k;
      ++k;
    }
  }
  // PTRD transformed rejection (Hormann 1993); exact for mean >= 10.
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mean);
  for (;;) {
    double v = uniform();
    if (v <= 0.86 * vr) {
      const double u = v / vr - 0.43;
      return static_cast<std::int64_t>(
          std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + mean + 0.445));
    }
    double u;
    if (v >= vr) {
      u = uniform() - 0.5;
    } else {
      u = v / vr - 0.93;
      u = (u < 0 ? -0.5 : 0.5) - u;
      v = uniform() * vr;
    }
    const double us = 0.5 - std::fabs(u);
    if (us < 0.013 && v > us) continue;
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.445);
    v = v * inv_alpha / (a / (us * us) + b);
    if (k >= 0.0 && std::log(v) <= k * log_mu - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

std::int64_t SeededRng::binomial(std::int64_t count, double prob) {
  if (count < 0 || !(prob >= 0.0) || !(prob <= 1.0)) {
    throw InvalidParams("binomial: need count >= 0 and prob in [0,1]");
  }
  if (count == 0 || prob == 0.0) return 0;
  if (prob == 1.0) return count;
  if (prob > 0.5) return count - binomial(count, 1.0 - prob);
  const double n = static_cast<double>(count);
  const double q0 = n * std::log1p(-prob);
  if (q0 > -700.0) {
    // CDF inversion via the recurrence on the mass function.
    const double r = prob / (1.0 - prob);
    double pk = std::exp(q0);
    double cdf = pk;
    const double u = uniform();
    std::int64_t k = 0;
    while (u > cdf && k < count) {
      pk *= r * (n - static_cast<double>(k)) / (static_cast<double>(k) + 1.0);
      ++k;
      cdf += pk;
    }
    return k;
  }
  // Mass at zero underflows; fall back to summing Bernoulli draws.
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < count; ++i) total += uniform() < prob ? 1 : 0;
  return total;
}

std::int64_t SeededRng::discrete_uniform(std::int64_t n) {
  if (n < 1) throw InvalidParams("discrete_uniform: support is empty");
  return 1 + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(n)));
}

double SeededRng::log_normal(double mean_log, double sd_log) {
  return std::exp(mean_log + sd_log * normal());
}

}  // namespace mhpcg
