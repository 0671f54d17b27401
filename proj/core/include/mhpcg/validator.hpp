#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mhpcg/spec.hpp"

namespace mhpcg {

/// A parent Gibbs (or MH within Gibbs) sampler: full steps only, every
/// component sampled exactly once per sweep. Throws when `spec` violates
/// either condition.
void check_parent_gibbs(const SamplerSpec& spec);

struct RuleViolation {
  int step_index = -1;  // 0-based; -1 when not tied to a step
  std::string rule;
  std::string message;
};

/// One move of the derivation. Replaying the recorded phases on the parent
/// reproduces the final spec exactly.
struct PhaseRecord {
  enum class Kind { SplitStep, ReduceConditioning, Permute, Trim };
  Kind kind = Kind::ReduceConditioning;
  int step_index = -1;          // step the move touches (0-based, pre-move indexing)
  IdSet ids;                    // reduce set / trimmed subset
  IdSet mh_inner_extra;         // reduce: part of ids joining the inner MH block
  std::vector<IdSet> parts;     // split: per-part sample sets, in order
  std::vector<int> order;       // permute
  bool absorbed_step = false;   // trim removed a whole duplicated MH kernel
  std::string note;
};

struct DerivationTrace {
  SamplerSpec parent;
  std::vector<PhaseRecord> phases;
  SamplerSpec final;

  /// Re-apply the phases to the parent.
  SamplerSpec replay() const;
  std::string text() const;
};

/// Propriety verdict. Proper requires a complete derivation; the validator
/// never claims impropriety, only unverifiability.
struct Verdict {
  enum class Status { Proper, ApproximatelyProper, Unverifiable };
  Status status = Status::Unverifiable;
  std::optional<DerivationTrace> derivation;
  std::vector<std::string> conditions;  // iterated-MH and joint-rule caveats
  std::vector<std::string> notes;       // informational, no verdict impact
  std::vector<RuleViolation> violations;

  bool proper() const { return status == Status::Proper; }
  std::string status_name() const;
  std::string to_json() const;
  std::string text() const;
};

/// Phase 1: sample `extra` in step `step_index` instead of conditioning on
/// it. For MH steps the result is a star kernel (reduced MH followed by an
/// exact draw of the reduced quantities); `mh_inner_extra` optionally moves
/// part of `extra` into the inner MH block instead of the trailing draw.
SamplerSpec reduce_conditioning(const SamplerSpec& spec, int step_index,
                                const IdSet& extra, const IdSet& mh_inner_extra = {});

/// Phase 2: reorder the sweep. Within the framework (all steps full) this
/// changes the kernel but not the stationary distribution.
SamplerSpec permute(const SamplerSpec& spec, const std::vector<int>& order);

struct RedundantDraw {
  int step_index = 0;
  IdSet subset;
};

/// A drawn subset is redundant iff it is re-sampled later in the sweep
/// before any kernel reads it. The sweep boundary reads every component
/// (the state there is the output), so a draw that survives to the end of
/// the sweep is never redundant.
std::vector<RedundantDraw> find_redundant(const SamplerSpec& spec);

/// Phase 3: remove a redundant subset from a step's draw; the removed
/// components move to the step's marginalized-out set. Throws NotRedundant
/// unless find_redundant certifies the subset.
SamplerSpec trim(const SamplerSpec& spec, int step_index, const IdSet& subset);

/// Certify `spec`: run the necessary-condition linter (the MH kernel rule,
/// applied cyclically), then search for a three-phase derivation from
/// `parent` when one is supplied, or fall back to the self-certifiable
/// shapes (all-full sweeps and telescoping exact factorizations). Iterated
/// MH steps are treated as exact draws but cap the verdict at
/// ApproximatelyProper. Throws SearchExhausted for sweeps of more than
/// eight steps with no parent hint.
Verdict validate(const SamplerSpec& spec, const SamplerSpec* parent = nullptr);

}  // namespace mhpcg
