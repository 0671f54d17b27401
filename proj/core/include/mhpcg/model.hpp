#pragma once

#include <string>

#include "mhpcg/rng.hpp"
#include "mhpcg/spec.hpp"
#include "mhpcg/state.hpp"

namespace mhpcg {

/// The (samples | conditions, marginalized-out) partition a step requests
/// from its model backend.
struct StepSets {
  IdSet samples;
  IdSet conditions_on;
  IdSet marginalized_out;
};

/// A target model: every conditional density and exact conditional sampler
/// the registered samplers request, dispatched on the requested partition.
/// Backends are immutable after construction and evaluation is pure, so
/// chains may run concurrently against one backend.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual std::string name() const = 0;

  /// The paper's starting values for this model's experiments.
  virtual ComponentState initial_state() const = 0;

  /// Draw sets.samples exactly from its conditional (of the marginal with
  /// sets.marginalized_out integrated out) and write it into state.
  /// Throws MissingConditional when no exact draw exists for the partition.
  virtual void draw_exact(const StepSets& sets, ComponentState& state,
                          SeededRng& rng) const = 0;

  /// Log target density for an MH step: the (possibly unnormalized) log
  /// density of the current values of sets.samples given the conditioning
  /// values, with sets.marginalized_out integrated out. -infinity outside
  /// the support; NaN is a model bug and the kernels will throw.
  virtual double log_target(const StepSets& sets, const ComponentState& state) const = 0;

  /// Normalized log density of the exact conditional used by blocked updates'
  /// jump corrections. Only required for partitions that support draw_exact.
  virtual double log_exact_conditional(const StepSets& sets,
                                       const ComponentState& state) const;
};

}  // namespace mhpcg
