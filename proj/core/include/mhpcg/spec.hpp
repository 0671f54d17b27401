#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mhpcg/state.hpp"

namespace mhpcg {

IdSet make_set(std::initializer_list<ComponentId> ids);
IdSet set_union(const IdSet& a, const IdSet& b);
IdSet set_minus(const IdSet& a, const IdSet& b);
IdSet set_intersect(const IdSet& a, const IdSet& b);
bool set_contains(const IdSet& a, const ComponentId& id);
bool set_subset(const IdSet& small, const IdSet& big);
void set_insert(IdSet& s, const ComponentId& id);

/// The jumping rule of an MH step. The forward/reverse densities of
/// asymmetric rules (log-scale walks) enter the acceptance ratio through
/// log_correction so the acceptance code stays uniform across rules.
struct JumpDescriptor {
  enum class Kind {
    SymmetricNormalWalk,        // per-dimension Gaussian increments
    LogNormalWalk,              // positive scalar, walk on the log scale
    DiscreteUniformIndependent, // integer scalar, fresh uniform on {1..support}
    IndependentMVNormal,        // multivariate Gaussian increment, full covariance
    ConcatMarginalDraw,         // joint MH: exact marginal draw of exact_set, inner rule for the rest
    ConcatConditionalDraw,      // blocked MH: inner rule first, then exact conditional of exact_set
  };

  Kind kind = Kind::SymmetricNormalWalk;
  Eigen::VectorXd scale;            // walk scales (one entry broadcasts)
  Eigen::MatrixXd covariance;       // IndependentMVNormal
  std::int64_t support = 0;         // DiscreteUniformIndependent
  IdSet exact_set;                  // concatenated kinds only
  IdSet exact_conditions;           // concatenated kinds: conditioning of the exact draw
                                    // (empty means the step's conditions-on)
  std::shared_ptr<JumpDescriptor> inner;  // concatenated kinds only
  IdSet depends_on;                 // components read besides the proposed set
  std::optional<double> tune_target;  // acceptance rate targeted during burnin

  static JumpDescriptor normal_walk(double scale, std::optional<double> tune = {});
  static JumpDescriptor log_normal_walk(double scale, std::optional<double> tune = {});
  static JumpDescriptor discrete_uniform(std::int64_t support);
  static JumpDescriptor mvnormal_walk(Eigen::MatrixXd cov, std::optional<double> tune = {});
  static JumpDescriptor concat_marginal(IdSet exact_set, JumpDescriptor inner,
                                        IdSet exact_conditions = {});
  static JumpDescriptor concat_conditional(IdSet exact_set, JumpDescriptor inner);

  bool is_walk() const;
};

/// One update step of a sampler sweep.
struct StepSpec {
  enum class Kind { DirectDraw, MH, StarKernel, IteratedMH };

  Kind kind = Kind::DirectDraw;
  IdSet samples;           // components this step draws
  IdSet conditions_on;     // components held fixed
  IdSet marginalized_out;  // components the target integrates over
  std::optional<JumpDescriptor> jump;  // MH-family kinds
  int iterations = 1;                  // L for IteratedMH
  IdSet star_trailing;                 // StarKernel: set drawn exactly after the inner MH

  bool is_mh_family() const {
    return kind == Kind::MH || kind == Kind::StarKernel || kind == Kind::IteratedMH;
  }

  /// Is this a draw from a complete conditional of the full target?
  bool is_full() const { return marginalized_out.empty(); }

  /// The components whose current values the step's kernel reads. Direct
  /// draws read only their conditioning set; MH kernels additionally read the
  /// sampled set (acceptance and rejection both depend on it) and whatever
  /// the jumping rule reads. A star kernel's trailing exact draw reads
  /// nothing old, so the trailing set drops out.
  IdSet kernel_dependencies() const;
};

/// An ordered sweep of steps plus the declared component list of the target.
struct SamplerSpec {
  std::string name;
  std::vector<ComponentId> components;  // declaration order is the trace order
  std::vector<StepSpec> steps;
  std::string model_ref;

  IdSet component_set() const;

  /// Structural invariants: per-step set partition, jump presence, every
  /// component sampled by at least one step. Throws std::invalid_argument.
  void check_structure() const;
};

/// JSON round-trip for the sampler-spec file format consumed by `validate`.
std::string sampler_spec_to_json(const SamplerSpec& spec);
SamplerSpec sampler_spec_from_json(const std::string& json_text);

}  // namespace mhpcg
