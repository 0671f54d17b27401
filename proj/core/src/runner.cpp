#include "mhpcg/runner.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <future>
#include <stdexcept>

#include "mhpcg/errors.hpp"
#include "mhpcg/kernels.hpp"

namespace mhpcg {

namespace {

/// Re-estimates the covariance shape of a multivariate walk from the burnin
/// history (scaled 2.38^2/d), while a ScaleTuner drives the overall size
/// toward the target acceptance rate.
struct CovAdapter {
  std::vector<Eigen::VectorXd> history;
  Eigen::MatrixXd base;
  double multiplier = 1.0;
  int refresh_every = 500;

  void maybe_refresh(JumpDescriptor& jump) {
    if (history.size() < 200 || history.size() % refresh_every != 0) return;
    const Eigen::Index d = history.front().size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : history) mean += x;
    mean /= static_cast<double>(history.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : history) {
      const Eigen::VectorXd c = x - mean;
      cov += c * c.transpose();
    }
    cov /= static_cast<double>(history.size() - 1);
    base = (5.6644 / static_cast<double>(d)) * cov +
           1e-12 * Eigen::MatrixXd::Identity(d, d);
    jump.covariance = multiplier * multiplier * base;
  }
};

struct StepContext {
  const StepSpec* spec = nullptr;
  int index = 0;  // 1-based
  StepSets sets;
  JumpDescriptor jump;  // mutable copy, adapted during burnin
  bool has_jump = false;
  std::optional<ScaleTuner> tuner;
  std::optional<CovAdapter> cov_adapter;
  // Concatenated-rule partitions, resolved once.
  IdSet walk_set;
  IdSet exact_set;
  StepSets exact_sets;
};

StepSets sets_of(const StepSpec& st) {
  return StepSets{st.samples, st.conditions_on, st.marginalized_out};
}

std::vector<StepContext> build_plan(const SamplerSpec& spec, const ModelBackend& model,
                                    bool tune) {
  (void)model;
  std::vector<StepContext> plan;
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    const StepSpec& st = spec.steps[i];
    StepContext ctx;
    ctx.spec = &st;
    ctx.index = static_cast<int>(i) + 1;
    ctx.sets = sets_of(st);
    if (st.jump) {
      ctx.jump = *st.jump;
      ctx.has_jump = true;
      if (ctx.jump.kind == JumpDescriptor::Kind::ConcatMarginalDraw) {
        ctx.exact_set = ctx.jump.exact_set;
        ctx.walk_set = set_minus(st.samples, ctx.exact_set);
        const IdSet cond = ctx.jump.exact_conditions.empty() ? st.conditions_on
                                                             : ctx.jump.exact_conditions;
        ctx.exact_sets.samples = ctx.exact_set;
        ctx.exact_sets.conditions_on = cond;
        ctx.exact_sets.marginalized_out =
            set_minus(set_minus(set_union(st.marginalized_out, st.samples), ctx.exact_set), cond);
      } else if (ctx.jump.kind == JumpDescriptor::Kind::ConcatConditionalDraw) {
        ctx.exact_set = ctx.jump.exact_set;
        ctx.walk_set = set_minus(st.samples, ctx.exact_set);
        ctx.exact_sets.samples = ctx.exact_set;
        ctx.exact_sets.conditions_on = set_union(st.conditions_on, ctx.walk_set);
        ctx.exact_sets.marginalized_out = st.marginalized_out;
      }
      const JumpDescriptor& tunable =
          ctx.jump.inner ? *ctx.jump.inner : ctx.jump;
      if (tune && tunable.is_walk() && tunable.tune_target) {
        ctx.tuner.emplace(*tunable.tune_target);
        if (tunable.kind == JumpDescriptor::Kind::IndependentMVNormal) {
          ctx.cov_adapter.emplace();
          ctx.cov_adapter->base = tunable.covariance;
        }
      }
    }
    plan.push_back(std::move(ctx));
  }
  return plan;
}

}  // namespace

Trace run_sampler(const SamplerSpec& spec, const ModelBackend& model,
                  const RunOptions& options) {
  spec.check_structure();
  const auto t0 = std::chrono::steady_clock::now();

  ComponentState state = options.initial ? *options.initial : model.initial_state();
  for (const auto& id : spec.components) {
    if (!state.has(id)) {
      throw std::invalid_argument("initial state lacks component '" + id + "'");
    }
  }
  SeededRng rng(options.seed, options.stream);
  std::vector<StepContext> plan = build_plan(spec, model, options.tune);

  std::vector<ComponentId> recorded =
      options.record.empty() ? spec.components : options.record;
  Trace trace(recorded, state);
  trace.meta.sampler = spec.name;
  trace.meta.model = model.name();
  trace.meta.seed = options.seed;
  trace.meta.stream = options.stream;
  trace.meta.burnin = options.burnin;
  trace.meta.iterations = options.iterations;

  std::vector<int> log_slot(plan.size(), -1);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan[i].spec->is_mh_family()) {
      StepAcceptanceLog log;
      log.step_index = plan[i].index;
      log.samples = plan[i].spec->samples;
      log_slot[i] = static_cast<int>(trace.acceptance.size());
      trace.acceptance.push_back(std::move(log));
    }
  }

  const int total = options.burnin + options.iterations;
  for (int iter = 0; iter < total; ++iter) {
    const bool in_burnin = iter < options.burnin;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      StepContext& ctx = plan[i];
      const StepSpec& st = *ctx.spec;
      MhOutcome outcome;
      bool did_mh = false;
      try {
        switch (st.kind) {
          case StepSpec::Kind::DirectDraw:
            model.draw_exact(ctx.sets, state, rng);
            break;
          case StepSpec::Kind::MH: {
            did_mh = true;
            if (ctx.has_jump &&
                ctx.jump.kind == JumpDescriptor::Kind::ConcatMarginalDraw) {
              StepSets cond_sets{ctx.walk_set,
                                 set_union(st.conditions_on, ctx.exact_set),
                                 st.marginalized_out};
              outcome = joint_mh_update(
                  [&](ComponentState& s, SeededRng& r) {
                    model.draw_exact(ctx.exact_sets, s, r);
                  },
                  *ctx.jump.inner,
                  [&](const ComponentState& s) { return model.log_target(cond_sets, s); },
                  state, ctx.exact_set, ctx.walk_set, rng);
            } else if (ctx.has_jump &&
                       ctx.jump.kind == JumpDescriptor::Kind::ConcatConditionalDraw) {
              outcome = blocked_mh_update(
                  *ctx.jump.inner,
                  [&](ComponentState& s, SeededRng& r) {
                    model.draw_exact(ctx.exact_sets, s, r);
                  },
                  [&](const ComponentState& s) {
                    return model.log_exact_conditional(ctx.exact_sets, s);
                  },
                  [&](const ComponentState& s) { return model.log_target(ctx.sets, s); },
                  state, ctx.walk_set, ctx.exact_set, rng);
            } else {
              outcome = mh_update(
                  [&](const ComponentState& s) { return model.log_target(ctx.sets, s); },
                  ctx.jump, state, st.samples, rng);
            }
            break;
          }
          case StepSpec::Kind::IteratedMH: {
            did_mh = true;
            outcome = iterated_mh_update(
                [&](const ComponentState& s) { return model.log_target(ctx.sets, s); },
                ctx.jump, state, st.samples, st.iterations, rng);
            break;
          }
          case StepSpec::Kind::StarKernel: {
            did_mh = true;
            const IdSet inner = set_minus(st.samples, st.star_trailing);
            StepSets inner_sets{inner, st.conditions_on,
                                set_union(st.marginalized_out, st.star_trailing)};
            StepSets trailing_sets{st.star_trailing, set_union(st.conditions_on, inner),
                                   st.marginalized_out};
            outcome = star_kernel_update(
                [&](const ComponentState& s) { return model.log_target(inner_sets, s); },
                ctx.jump,
                [&](ComponentState& s, SeededRng& r) {
                  model.draw_exact(trailing_sets, s, r);
                },
                state, inner, rng);
            break;
          }
        }
      } catch (const std::exception& e) {
        throw std::runtime_error(spec.name + " step " + std::to_string(ctx.index) +
                                 ", iteration " + std::to_string(iter) + ": " + e.what());
      }

      if (did_mh && in_burnin && ctx.tuner) {
        const double factor = ctx.tuner->record(outcome.accepted);
        JumpDescriptor& tunable = ctx.jump.inner ? *ctx.jump.inner : ctx.jump;
        if (factor != 1.0) {
          apply_scale_factor(tunable, factor);
          if (ctx.cov_adapter) ctx.cov_adapter->multiplier *= factor;
        }
        if (ctx.cov_adapter) {
          std::size_t n = 0;
          const IdSet& walk = ctx.walk_set.empty() ? st.samples : ctx.walk_set;
          for (const auto& id : walk) n += value_size(state.get(id));
          Eigen::VectorXd x(static_cast<Eigen::Index>(n));
          std::size_t off = 0;
          for (const auto& id : walk) off += flatten_value(state.get(id), x.data() + off);
          ctx.cov_adapter->history.push_back(std::move(x));
          ctx.cov_adapter->maybe_refresh(tunable);
        }
      }
      if (did_mh && !in_burnin) {
        StepAcceptanceLog& log = trace.acceptance[static_cast<std::size_t>(log_slot[i])];
        log.accepted.push_back(outcome.accepted ? 1 : 0);
        log.log_r.push_back(outcome.log_r);
        log.inner_accepts.push_back(outcome.inner_accepts);
        log.proposals.push_back(std::move(outcome.proposal));
      }
    }
    if (!in_burnin) trace.add_row(state);
  }

  trace.meta.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

std::vector<Trace> run_chains(const SamplerSpec& spec, const ModelBackend& model,
                              const RunOptions& options,
                              const std::vector<std::uint64_t>& seeds) {
  std::vector<std::future<Trace>> futures;
  futures.reserve(seeds.size());
  for (std::size_t c = 0; c < seeds.size(); ++c) {
    futures.push_back(std::async(std::launch::async, [&, c] {
      RunOptions opt = options;
      opt.seed = seeds[c];
      const SeededRng chain_rng = SeededRng::for_chain(seeds[c], c);
      opt.stream = chain_rng.stream();
      return run_sampler(spec, model, opt);
    }));
  }
  std::vector<Trace> traces;
  traces.reserve(seeds.size());
  for (auto& f : futures) traces.push_back(f.get());
  return traces;
}

}  // namespace mhpcg
