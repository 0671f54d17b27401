#pragma once

#include <stdexcept>
#include <string>

namespace mhpcg {

/// Distribution parameters violate the family's invariants. Signals a model
/// bug upstream, never a sampling failure.
struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An MH target returned NaN. The chain never silently accepts such a state.
struct NonFiniteDensity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The model backend has no conditional for the requested
/// (samples | conditions, marginalized) partition.
struct MissingConditional : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Proposal-scale adaptation could not bring the acceptance rate into a
/// workable band; the target is pathological for the jumping rule.
struct TuningFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// reduce_conditioning called with a set that is not conditioned on (or
/// intersects the sampled set).
struct IllegalReduction : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// trim called on a subset that find_redundant does not certify. This is
/// exactly the failure mode that turns a sampler improper.
struct NotRedundant : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Derivation search gave up: more than eight steps and no parent hint.
struct SearchExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A degenerate (zero-variance) series was passed to a diagnostic.
struct DegenerateSeries : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// choose_L found no lag below the threshold within the allowed range.
struct LNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A trace comparison referenced a component absent from one of the traces.
struct ComponentMissing : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace mhpcg
