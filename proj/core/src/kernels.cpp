#include "mhpcg/kernels.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "mhpcg/errors.hpp"

namespace mhpcg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<Value> snapshot(const ComponentState& state, const IdSet& ids) {
  std::vector<Value> vals;
  vals.reserve(ids.size());
  for (const auto& id : ids) vals.push_back(state.get(id));
  return vals;
}

void restore(ComponentState& state, const IdSet& ids, const std::vector<Value>& vals) {
  for (std::size_t i = 0; i < ids.size(); ++i) state.set(ids[i], vals[i]);
}

std::vector<double> flatten_ids(const ComponentState& state, const IdSet& ids) {
  std::size_t n = 0;
  for (const auto& id : ids) n += value_size(state.get(id));
  std::vector<double> flat(n);
  std::size_t off = 0;
  for (const auto& id : ids) off += flatten_value(state.get(id), flat.data() + off);
  return flat;
}

double scale_at(const Eigen::VectorXd& scale, std::size_t i) {
  if (scale.size() == 1) return scale[0];
  return scale[static_cast<Eigen::Index>(i)];
}

/// Draw a proposal for `samples` from `jump`, writing proposed values into
/// scratch Values (not into the state). Returns log J(old|new) - log J(new|old).
double propose(const JumpDescriptor& jump, const ComponentState& state,
               const IdSet& samples, SeededRng& rng, std::vector<Value>& proposed) {
  proposed.clear();
  switch (jump.kind) {
    case JumpDescriptor::Kind::SymmetricNormalWalk: {
      std::size_t dim = 0;
      for (const auto& id : samples) {
        const Value& cur = state.get(id);
        if (const auto* d = std::get_if<double>(&cur)) {
          proposed.push_back(*d + scale_at(jump.scale, dim) * rng.normal());
          ++dim;
        } else if (const auto* v = std::get_if<Eigen::VectorXd>(&cur)) {
          Eigen::VectorXd out = *v;
          for (Eigen::Index i = 0; i < out.size(); ++i) {
            out[i] += scale_at(jump.scale, dim) * rng.normal();
            ++dim;
          }
          proposed.push_back(std::move(out));
        } else {
          throw InvalidParams("normal walk needs real components");
        }
      }
      return 0.0;
    }
    case JumpDescriptor::Kind::LogNormalWalk: {
      if (samples.size() != 1) throw InvalidParams("log-normal walk is scalar");
      const double cur = state.scalar(samples[0]);
      if (!(cur > 0.0)) throw InvalidParams("log-normal walk needs a positive value");
      const double prop = std::exp(std::log(cur) + jump.scale[0] * rng.normal());
      proposed.push_back(prop);
      // Jacobian of the log-scale walk.
      return std::log(prop) - std::log(cur);
    }
    case JumpDescriptor::Kind::DiscreteUniformIndependent: {
      if (samples.size() != 1) throw InvalidParams("discrete uniform proposal is scalar");
      proposed.push_back(rng.discrete_uniform(jump.support));
      return 0.0;
    }
    case JumpDescriptor::Kind::IndependentMVNormal: {
      const std::vector<double> flat = flatten_ids(state, samples);
      const Eigen::Index d = static_cast<Eigen::Index>(flat.size());
      if (jump.covariance.rows() != d) {
        throw InvalidParams("mvnormal walk covariance dimension mismatch");
      }
      Eigen::LLT<Eigen::MatrixXd> llt(jump.covariance);
      if (llt.info() != Eigen::Success) {
        throw InvalidParams("mvnormal walk covariance not positive definite");
      }
      Eigen::VectorXd z(d);
      for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
      const Eigen::VectorXd step = llt.matrixL() * z;
      Eigen::Index off = 0;
      for (const auto& id : samples) {
        const Value& cur = state.get(id);
        if (const auto* v = std::get_if<double>(&cur)) {
          proposed.push_back(*v + step[off]);
          off += 1;
        } else if (const auto* vec = std::get_if<Eigen::VectorXd>(&cur)) {
          Eigen::VectorXd out = *vec;
          for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += step[off + i];
          off += out.size();
          proposed.push_back(std::move(out));
        } else {
          throw InvalidParams("mvnormal walk needs real components");
        }
      }
      return 0.0;
    }
    case JumpDescriptor::Kind::ConcatMarginalDraw:
    case JumpDescriptor::Kind::ConcatConditionalDraw:
      throw InvalidParams("concatenated rules are only legal inside joint/blocked updates");
  }
  throw InvalidParams("unknown jump kind");
}

double checked(double lp, const char* what) {
  if (std::isnan(lp) || lp == std::numeric_limits<double>::infinity()) {
    throw NonFiniteDensity(std::string(what) + " returned a non-finite log density");
  }
  return lp;
}

}  // namespace

MhOutcome mh_update(const LogTargetFn& target, const JumpDescriptor& jump,
                    ComponentState& state, const IdSet& samples, SeededRng& rng) {
  MhOutcome out;
  const double u = rng.uniform();
  const double lp_cur = checked(target(state), "target (current)");
  if (lp_cur == kNegInf) {
    throw NonFiniteDensity("current state has zero target density");
  }
  const std::vector<Value> old = snapshot(state, samples);
  std::vector<Value> proposed;
  const double corr = propose(jump, state, samples, rng, proposed);
  restore(state, samples, proposed);
  const double lp_prop = checked(target(state), "target (proposal)");
  out.log_r = lp_prop == kNegInf ? kNegInf : lp_prop - lp_cur + corr;
  out.proposal = flatten_ids(state, samples);
  out.accepted = std::log(u) < out.log_r;
  if (!out.accepted) restore(state, samples, old);
  out.inner_accepts = out.accepted ? 1 : 0;
  return out;
}

MhOutcome iterated_mh_update(const LogTargetFn& target, const JumpDescriptor& jump,
                             ComponentState& state, const IdSet& samples, int L,
                             SeededRng& rng) {
  if (L < 1) throw InvalidParams("iterated MH needs L >= 1");
  MhOutcome last;
  int accepts = 0;
  for (int l = 0; l < L; ++l) {
    last = mh_update(target, jump, state, samples, rng);
    accepts += last.accepted ? 1 : 0;
  }
  last.inner_accepts = accepts;
  return last;
}

MhOutcome joint_mh_update(const ExactDrawFn& marginal_draw,
                          const JumpDescriptor& inner_jump,
                          const LogTargetFn& conditional_target, ComponentState& state,
                          const IdSet& exact_set, const IdSet& walk_set, SeededRng& rng) {
  MhOutcome out;
  const double u = rng.uniform();
  const double lp_cur = checked(conditional_target(state), "conditional target (current)");
  if (lp_cur == kNegInf) {
    throw NonFiniteDensity("current state has zero target density");
  }
  const IdSet both = set_union(exact_set, walk_set);
  const std::vector<Value> old = snapshot(state, both);
  // Inner proposal is computed against the pre-proposal state, and the
  // marginal draw also reads the pre-proposal state.
  std::vector<Value> walk_prop;
  const double corr = propose(inner_jump, state, walk_set, rng, walk_prop);
  marginal_draw(state, rng);
  restore(state, walk_set, walk_prop);
  const double lp_prop = checked(conditional_target(state), "conditional target (proposal)");
  out.log_r = lp_prop == kNegInf ? kNegInf : lp_prop - lp_cur + corr;
  out.proposal = flatten_ids(state, both);
  out.accepted = std::log(u) < out.log_r;
  if (!out.accepted) restore(state, both, old);
  out.inner_accepts = out.accepted ? 1 : 0;
  return out;
}

MhOutcome blocked_mh_update(const JumpDescriptor& outer_jump,
                            const ExactDrawFn& conditional_draw,
                            const LogTargetFn& conditional_logpdf,
                            const LogTargetFn& joint_target, ComponentState& state,
                            const IdSet& walk_set, const IdSet& exact_set,
                            SeededRng& rng) {
  MhOutcome out;
  const double u = rng.uniform();
  const double lp_cur_joint = checked(joint_target(state), "joint target (current)");
  const double lp_cur_cond =
      checked(conditional_logpdf(state), "conditional density (current)");
  if (lp_cur_joint == kNegInf) {
    throw NonFiniteDensity("current state has zero target density");
  }
  const IdSet both = set_union(exact_set, walk_set);
  const std::vector<Value> old = snapshot(state, both);
  std::vector<Value> walk_prop;
  const double corr = propose(outer_jump, state, walk_set, rng, walk_prop);
  restore(state, walk_set, walk_prop);
  conditional_draw(state, rng);
  const double lp_prop_joint = checked(joint_target(state), "joint target (proposal)");
  const double lp_prop_cond =
      checked(conditional_logpdf(state), "conditional density (proposal)");
  // The conditional densities enter through the concatenated jumping rule;
  // together with the joint target they cancel down to the walk-set ratio.
  out.log_r = lp_prop_joint == kNegInf
                  ? kNegInf
                  : (lp_prop_joint - lp_cur_joint) + (lp_cur_cond - lp_prop_cond) + corr;
  out.proposal = flatten_ids(state, both);
  out.accepted = std::log(u) < out.log_r;
  if (!out.accepted) restore(state, both, old);
  out.inner_accepts = out.accepted ? 1 : 0;
  return out;
}

MhOutcome star_kernel_update(const LogTargetFn& reduced_target,
                             const JumpDescriptor& jump,
                             const ExactDrawFn& trailing_draw, ComponentState& state,
                             const IdSet& inner_set, SeededRng& rng) {
  MhOutcome out = mh_update(reduced_target, jump, state, inner_set, rng);
  // The reduced quantities are refreshed from their complete conditional
  // regardless of the inner decision.
  trailing_draw(state, rng);
  return out;
}

ScaleTuner::ScaleTuner(double target_rate, int batch_size)
    : target_(target_rate), batch_size_(batch_size) {
  if (!(target_rate > 0.0) || !(target_rate < 1.0)) {
    throw InvalidParams("tuning target rate must be in (0,1)");
  }
}

double ScaleTuner::record(bool accepted) {
  ++in_batch_;
  accepted_in_batch_ += accepted ? 1 : 0;
  if (in_batch_ < batch_size_) return 1.0;
  last_rate_ = static_cast<double>(accepted_in_batch_) / batch_size_;
  in_batch_ = 0;
  accepted_in_batch_ = 0;
  ++batches_;
  if (last_rate_ >= 0.05 && last_rate_ <= 0.95) ever_workable_ = true;
  const double gain = 1.0 / std::sqrt(static_cast<double>(batches_));
  return std::exp(gain * (last_rate_ - target_));
}

void apply_scale_factor(JumpDescriptor& jump, double factor) {
  switch (jump.kind) {
    case JumpDescriptor::Kind::SymmetricNormalWalk:
    case JumpDescriptor::Kind::LogNormalWalk:
      jump.scale *= factor;
      break;
    case JumpDescriptor::Kind::IndependentMVNormal:
      jump.covariance *= factor * factor;
      break;
    case JumpDescriptor::Kind::ConcatMarginalDraw:
    case JumpDescriptor::Kind::ConcatConditionalDraw:
      if (jump.inner) apply_scale_factor(*jump.inner, factor);
      break;
    default:
      break;
  }
}

JumpDescriptor tune_scale(const StepSpec& step, const LogTargetFn& target,
                          const ComponentState& start, double target_rate,
                          int pilot_iterations, SeededRng& rng) {
  if (!step.is_mh_family() || !step.jump || !step.jump->is_walk()) {
    throw InvalidParams("tune_scale needs an MH-family step with a walk-type rule");
  }
  JumpDescriptor jump = *step.jump;
  ComponentState state = start;
  ScaleTuner tuner(target_rate);
  // Generous deadline: climbing from a far-off initial scale takes the
  // Robbins-Monro recursion on the order of a hundred batches.
  const int max_batches_to_workable = 400;
  for (int i = 0; i < pilot_iterations; ++i) {
    const MhOutcome o = mh_update(target, jump, state, step.samples, rng);
    const double factor = tuner.record(o.accepted);
    if (factor != 1.0) apply_scale_factor(jump, factor);
    if (tuner.completed_batches() >= max_batches_to_workable && !tuner.ever_workable()) {
      throw TuningFailed("acceptance rate never entered [0.05, 0.95]");
    }
  }
  if (!tuner.ever_workable()) {
    throw TuningFailed("acceptance rate never entered [0.05, 0.95]");
  }
  return jump;
}

}  // namespace mhpcg
