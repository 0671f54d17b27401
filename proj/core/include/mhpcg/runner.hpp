#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mhpcg/model.hpp"
#include "mhpcg/spec.hpp"
#include "mhpcg/trace.hpp"

namespace mhpcg {

struct RunOptions {
  int iterations = 10000;  // post-burnin draws (T)
  int burnin = 0;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  /// Components to record; empty records the full state every iteration.
  std::vector<ComponentId> record;
  /// Adapt walk scales toward their tune_target during burnin, then freeze.
  bool tune = true;
  std::optional<ComponentState> initial;
};

/// Execute the sweep `spec` against `model` for burnin + T iterations,
/// recording the post-burnin states and the per-MH-step acceptance log.
/// Step execution order is exactly spec order each iteration and the result
/// is deterministic given (seed, stream).
Trace run_sampler(const SamplerSpec& spec, const ModelBackend& model,
                  const RunOptions& options);

/// One chain per seed, each with its own rng stream, run in parallel.
std::vector<Trace> run_chains(const SamplerSpec& spec, const ModelBackend& model,
                              const RunOptions& options,
                              const std::vector<std::uint64_t>& seeds);

}  // namespace mhpcg
