#pragma once

#include <functional>
#include <vector>

#include "mhpcg/rng.hpp"
#include "mhpcg/spec.hpp"
#include "mhpcg/state.hpp"

namespace mhpcg {

/// Log target density evaluated at the state's current values of the sampled
/// set, holding everything else fixed. Unnormalized is fine.
using LogTargetFn = std::function<double(const ComponentState&)>;

/// Exact conditional draw written into the state.
using ExactDrawFn = std::function<void(ComponentState&, SeededRng&)>;

struct MhOutcome {
  bool accepted = false;
  double log_r = 0.0;                 // log acceptance ratio, jump-corrected
  std::vector<double> proposal;       // flattened proposed values
  int inner_accepts = 0;              // iterated updates only
};

/// One Metropolis-Hastings update of `samples` against `target`. On
/// acceptance the proposal is written into the state; on rejection the state
/// is restored bit for bit.
///
/// Rng consumption contract (shared by every kernel here): the acceptance
/// uniform is drawn first, then the proposal, then any exact draws the
/// jumping rule requires. With one stream, the plain, iterated (L=1), and
/// joint updates therefore see the same uniform and inner proposal, which is
/// what makes their acceptance decisions comparable draw by draw.
MhOutcome mh_update(const LogTargetFn& target, const JumpDescriptor& jump,
                    ComponentState& state, const IdSet& samples, SeededRng& rng);

/// Apply mh_update L times, chaining the state; returns the outcome of the
/// final subiteration plus the inner acceptance count.
MhOutcome iterated_mh_update(const LogTargetFn& target, const JumpDescriptor& jump,
                             ComponentState& state, const IdSet& samples, int L,
                             SeededRng& rng);

/// Joint strategy: propose exact_set by an exact marginal draw and walk_set
/// by `inner_jump`, then accept or reject both together. The exact-draw
/// densities cancel from the ratio, leaving
///   r = p(walk' | exact', rest) J(walk | walk') /
///       [ p(walk | exact, rest) J(walk' | walk) ],
/// so only the conditional target of walk_set given exact_set is needed.
/// The marginal draw reads the pre-proposal state.
MhOutcome joint_mh_update(const ExactDrawFn& marginal_draw,
                          const JumpDescriptor& inner_jump,
                          const LogTargetFn& conditional_target, ComponentState& state,
                          const IdSet& exact_set, const IdSet& walk_set, SeededRng& rng);

/// Blocked strategy: propose walk_set by `outer_jump` and exact_set from its
/// exact conditional at the proposed value; the conditional density enters
/// the jump correction. The ratio computed here from the joint target reduces
/// algebraically to the walk-set-only ratio, and the identity is exercised
/// numerically by the tests. On rejection both sets keep their old values.
MhOutcome blocked_mh_update(const JumpDescriptor& outer_jump,
                            const ExactDrawFn& conditional_draw,
                            const LogTargetFn& conditional_logpdf,
                            const LogTargetFn& joint_target, ComponentState& state,
                            const IdSet& walk_set, const IdSet& exact_set,
                            SeededRng& rng);

/// Star kernel: a reduced MH update of inner_set followed immediately by an
/// exact draw of the reduced-out components from their complete conditional.
/// The trailing draw runs whether or not the inner proposal was accepted.
MhOutcome star_kernel_update(const LogTargetFn& reduced_target,
                             const JumpDescriptor& jump,
                             const ExactDrawFn& trailing_draw, ComponentState& state,
                             const IdSet& inner_set, SeededRng& rng);

/// Multiplicative proposal-scale adaptation toward a target acceptance rate,
/// applied in batches (Robbins-Monro on the log scale). Used during burnin
/// only; the scale is frozen afterwards so the kernel stays time-homogeneous.
class ScaleTuner {
 public:
  explicit ScaleTuner(double target_rate, int batch_size = 50);

  /// Record one accept/reject. Returns the factor to apply to the scale
  /// (1.0 except at batch boundaries).
  double record(bool accepted);

  double last_batch_rate() const { return last_rate_; }
  int completed_batches() const { return batches_; }

  /// True once some completed batch landed in the workable band [0.05, 0.95].
  bool ever_workable() const { return ever_workable_; }

 private:
  double target_;
  int batch_size_;
  int in_batch_ = 0;
  int accepted_in_batch_ = 0;
  int batches_ = 0;
  double last_rate_ = 0.0;
  bool ever_workable_ = false;
};

/// Pilot-tune a walk-type jumping rule against a fixed target; returns the
/// descriptor with the adapted scale. Throws TuningFailed when the acceptance
/// rate never enters [0.05, 0.95] within the pilot budget.
JumpDescriptor tune_scale(const StepSpec& step, const LogTargetFn& target,
                          const ComponentState& start, double target_rate,
                          int pilot_iterations, SeededRng& rng);

/// Scale a walk descriptor by a multiplicative factor (standard deviation
/// scale for Gaussian kinds).
void apply_scale_factor(JumpDescriptor& jump, double factor);

}  // namespace mhpcg
