#pragma once

#include <array>
#include <cstdint>

namespace mhpcg {

/// Deterministic stream of pseudo-random numbers (xoshiro256++ state,
/// SplitMix64 seeding). A (seed, stream) pair plus the call sequence fully
/// determines every draw, bit for bit, on a fixed build. All distribution
/// transforms used by the samplers live here so reproducibility does not
/// depend on the standard library's unspecified algorithms.
///
/// Streams are cheap: every chain or replication owns one, derived from the
/// master seed and its chain index, and streams are never shared.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Stream for chain `chain_index` of a multi-chain run.
  static SeededRng for_chain(std::uint64_t master_seed, std::uint64_t chain_index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform();

  /// Standard normal via the Marsaglia polar method (no cached spare, so the
  /// draw count per call is what the rejection loop consumed).
  double normal();

  /// Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t below(std::uint64_t n);

  double gamma(double shape, double rate);
  double inv_gamma(double shape, double scale);
  std::int64_t poisson(double mean);
  std::int64_t binomial(std::int64_t count, double prob);
  std::int64_t discrete_uniform(std::int64_t n);  // uniform on {1, ..., n}
  double log_normal(double mean_log, double sd_log);

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

}  // namespace mhpcg
