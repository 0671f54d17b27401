#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "mhpcg/diagnostics.hpp"
#include "mhpcg/distributions.hpp"
#include "mhpcg/errors.hpp"
#include "mhpcg/kernels.hpp"
#include "mhpcg/models/gaussian.hpp"
#include "mhpcg/stats.hpp"

using namespace mhpcg;

namespace {

double std_normal_log_pdf(double x) {
  return -0.5 * std::log(2 * std::numbers::pi) - 0.5 * x * x;
}

LogTargetFn scalar_target(const ComponentId& id, double (*logp)(double)) {
  return [id, logp](const ComponentState& s) { return logp(s.scalar(id)); };
}

}  // namespace

TEST_CASE("proposal equal to current is always accepted with log_r zero") {
  ComponentState state;
  state.set("x", 0.7);
  SeededRng rng(3, 0);
  const JumpDescriptor frozen = JumpDescriptor::normal_walk(0.0);
  for (int i = 0; i < 200; ++i) {
    const MhOutcome o =
        mh_update(scalar_target("x", std_normal_log_pdf), frozen, state, {"x"}, rng);
    CHECK(o.log_r == 0.0);
    CHECK(o.accepted);
  }
}

TEST_CASE("walk acceptance rate matches the two-dimensional quadrature oracle") {
  const double s = 2.4;
  // Oracle: E_x E_d[ min(1, phi(x+d)/phi(x)) ] by nested Simpson rules.
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
  auto inner = [&](double x) {
    const int n = 600;
    const double lo = -6.0 * s, hi = 6.0 * s;
    const double h = (hi - lo) / n;
    auto f = [&](double d) {
      const double ratio = std::exp(-0.5 * ((x + d) * (x + d) - x * x));
      return std::exp(-0.5 * d * d / (s * s)) / (s * std::sqrt(2 * std::numbers::pi)) *
             std::min(1.0, ratio);
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; i += 2) acc += 4 * f(lo + i * h);
    for (int i = 2; i < n; i += 2) acc += 2 * f(lo + i * h);
    return acc * h / 3.0;
  };
  double oracle = 0.0;
  {
    const int n = 600;
    const double lo = -8.0, hi = 8.0;
    const double h = (hi - lo) / n;
    auto f = [&](double x) { return phi(x) * inner(x); };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < n; i += 2) acc += 4 * f(lo + i * h);
    for (int i = 2; i < n; i += 2) acc += 2 * f(lo + i * h);
    oracle = acc * h / 3.0;
  }

  ComponentState state;
  state.set("x", 0.0);
  SeededRng rng(11, 0);
  const JumpDescriptor walk = JumpDescriptor::normal_walk(s);
  int accepted = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    accepted +=
        mh_update(scalar_target("x", std_normal_log_pdf), walk, state, {"x"}, rng).accepted;
  }
  CHECK(std::fabs(static_cast<double>(accepted) / n - oracle) < 0.01);
}

TEST_CASE("walk on the bivariate conditional reproduces the conditional mean") {
  const BivariateNormalModel model(0.9);
  const double psi1 = 1.2;
  ComponentState state;
  state.set("psi1", psi1);
  state.set("psi2", 0.0);
  const StepSets sets{{"psi2"}, {"psi1"}, {}};
  const auto target = [&](const ComponentState& s) { return model.log_target(sets, s); };
  const JumpDescriptor walk = JumpDescriptor::normal_walk(std::sqrt(3.0));
  SeededRng rng(17, 0);
  const int n = 100000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) {
    mh_update(target, walk, state, {"psi2"}, rng);
    draws[static_cast<std::size_t>(i)] = state.scalar("psi2");
  }
  const double se = std::sqrt(variance(draws) / ess(draws));
  CHECK(std::fabs(mean(draws) - 0.9 * psi1) < 3.0 * se);
}

TEST_CASE("iterated MH with L=1 equals a single update on the same stream") {
  ComponentState a, b;
  a.set("x", 0.3);
  b.set("x", 0.3);
  SeededRng ra(5, 5), rb(5, 5);
  const JumpDescriptor walk = JumpDescriptor::normal_walk(1.0);
  for (int i = 0; i < 500; ++i) {
    const MhOutcome oa =
        mh_update(scalar_target("x", std_normal_log_pdf), walk, a, {"x"}, ra);
    const MhOutcome ob =
        iterated_mh_update(scalar_target("x", std_normal_log_pdf), walk, b, {"x"}, 1, rb);
    CHECK(oa.accepted == ob.accepted);
    CHECK(a.scalar("x") == b.scalar("x"));
  }
}

TEST_CASE("iterating the inner update drives the output autocorrelation down") {
  const BivariateNormalModel model(0.9);
  const StepSets sets{{"psi2"}, {"psi1"}, {}};
  const auto target = [&](const ComponentState& s) { return model.log_target(sets, s); };
  const JumpDescriptor walk = JumpDescriptor::normal_walk(std::sqrt(3.0));
  auto lag1_at = [&](int l) {
    ComponentState state;
    state.set("psi1", 0.0);
    state.set("psi2", 0.0);
    SeededRng rng(23, 0);
    const int t = 40000;
    std::vector<double> psi2(t);
    for (int i = 0; i < t; ++i) {
      state.set("psi1", rng.normal());  // fresh marginal draw each iteration
      iterated_mh_update(target, walk, state, {"psi2"}, l, rng);
      psi2[static_cast<std::size_t>(i)] = state.scalar("psi2");
    }
    return acf(psi2, 1).at(1);
  };
  const double l1 = lag1_at(1);
  const double l7 = lag1_at(7);
  const double l9 = lag1_at(9);
  CHECK(l1 > l7);
  CHECK(l7 > l9);
  // Whole-iteration rejection persistence floors the L=7 residual just above
  // 0.05 under the variance-3 walk; two more subiterations clear it.
  CHECK(l7 < 0.10);
  CHECK(std::fabs(l9) < 0.05);
}

TEST_CASE("joint strategy ratio equals the iterated ratio when the target is independent") {
  // With zero correlation p(B|A) does not depend on A, so the ratios and the
  // accept decisions coincide draw by draw on one stream.
  const BivariateNormalModel model(0.0);
  const StepSets cond{{"psi2"}, {"psi1"}, {}};
  const auto target = [&](const ComponentState& s) { return model.log_target(cond, s); };
  const JumpDescriptor walk = JumpDescriptor::normal_walk(1.3);
  ComponentState sp, sj;
  sp.set("psi1", 0.4);
  sp.set("psi2", -0.2);
  sj = sp;
  SeededRng rp(31, 0), rj(31, 0);
  const StepSets marg{{"psi1"}, {}, {"psi2"}};
  for (int i = 0; i < 2000; ++i) {
    const MhOutcome op = mh_update(target, walk, sp, {"psi2"}, rp);
    const MhOutcome oj = joint_mh_update(
        [&](ComponentState& s, SeededRng& r) { model.draw_exact(marg, s, r); }, walk, target,
        sj, {"psi1"}, {"psi2"}, rj);
    CHECK(op.log_r == oj.log_r);
    CHECK(op.accepted == oj.accepted);
    CHECK(sp.scalar("psi2") == sj.scalar("psi2"));
    // Re-sync: the joint kernel consumed one extra draw for psi1.
    rp = rj;
    sp.set("psi1", sj.scalar("psi1"));
  }
}

TEST_CASE("joint strategy on the 0.9-correlation target decorrelates slowly") {
  const BivariateNormalModel model(0.9);
  const StepSets cond{{"psi2"}, {"psi1"}, {}};
  const StepSets marg{{"psi1"}, {}, {"psi2"}};
  const auto target = [&](const ComponentState& s) { return model.log_target(cond, s); };
  const JumpDescriptor walk = JumpDescriptor::normal_walk(std::sqrt(3.0));
  ComponentState state;
  state.set("psi1", 0.0);
  state.set("psi2", 0.0);
  SeededRng rng(37, 0);
  const int t = 10000;
  std::vector<double> psi2(t);
  for (int i = 0; i < t; ++i) {
    joint_mh_update([&](ComponentState& s, SeededRng& r) { model.draw_exact(marg, s, r); },
                    walk, target, state, {"psi1"}, {"psi2"}, rng);
    psi2[static_cast<std::size_t>(i)] = state.scalar("psi2");
  }
  const AcfResult r = acf(psi2, 60);
  CHECK(r.at(1) >= 0.3);
  int first_small = 0;
  for (int k = 1; k <= 60; ++k) {
    if (std::fabs(r.at(k)) < 0.05) {
      first_small = k;
      break;
    }
  }
  CHECK(first_small >= 20);
}

TEST_CASE("blocked and unblocked log ratios agree to forcing precision") {
  Eigen::Matrix3d cov;
  cov << 1.0, 0.6, 0.3, 0.6, 1.0, 0.5, 0.3, 0.5, 1.0;
  const GaussianModel model({"a", "b", "c"}, Eigen::Vector3d::Zero(), cov);
  const StepSets joint_sets{make_set({"a", "b"}), {"c"}, {}};
  const StepSets cond_sets{{"b"}, make_set({"a", "c"}), {}};
  const StepSets marg_sets{{"a"}, {"c"}, {"b"}};
  const JumpDescriptor walk = JumpDescriptor::normal_walk(0.9);
  SeededRng rng(41, 0);
  for (int i = 0; i < 2000; ++i) {
    ComponentState state;
    state.set("a", rng.normal());
    state.set("b", rng.normal());
    state.set("c", rng.normal());
    SeededRng fa = rng, fb = rng;
    ComponentState sa = state, sb = state;
    const MhOutcome blocked = blocked_mh_update(
        walk, [&](ComponentState& s, SeededRng& r) { model.draw_exact(cond_sets, s, r); },
        [&](const ComponentState& s) { return model.log_exact_conditional(cond_sets, s); },
        [&](const ComponentState& s) { return model.log_target(joint_sets, s); }, sa, {"a"},
        {"b"}, fa);
    const MhOutcome plain = mh_update(
        [&](const ComponentState& s) { return model.log_target(marg_sets, s); }, walk, sb,
        {"a"}, fb);
    CHECK(std::fabs(blocked.log_r - plain.log_r) <= 1e-12);
    CHECK(blocked.accepted == plain.accepted);
    rng = fa;
  }
}

TEST_CASE("blocked update with a frozen walk always accepts and refreshes the conditional") {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.7, 0.7, 1.0;
  const GaussianModel model({"a", "b"}, Eigen::Vector2d::Zero(), cov);
  const StepSets joint_sets{make_set({"a", "b"}), {}, {}};
  const StepSets cond_sets{{"b"}, {"a"}, {}};
  ComponentState state;
  state.set("a", 0.5);
  state.set("b", -1.0);
  SeededRng rng(43, 0);
  const JumpDescriptor frozen = JumpDescriptor::normal_walk(0.0);
  for (int i = 0; i < 50; ++i) {
    const double b_before = state.scalar("b");
    const MhOutcome o = blocked_mh_update(
        frozen, [&](ComponentState& s, SeededRng& r) { model.draw_exact(cond_sets, s, r); },
        [&](const ComponentState& s) { return model.log_exact_conditional(cond_sets, s); },
        [&](const ComponentState& s) { return model.log_target(joint_sets, s); }, state,
        {"a"}, {"b"}, rng);
    CHECK(o.accepted);
    CHECK(state.scalar("b") != b_before);
    CHECK(state.scalar("a") == 0.5);
  }
}

TEST_CASE("star kernel refreshes the trailing set even on rejection") {
  Eigen::Matrix2d cov;
  cov << 1.0, 0.7, 0.7, 1.0;
  const GaussianModel model({"a", "b"}, Eigen::Vector2d::Zero(), cov);
  const StepSets reduced{{"a"}, {}, {"b"}};
  const StepSets trailing{{"b"}, {"a"}, {}};
  ComponentState state;
  state.set("a", 0.0);
  state.set("b", 0.0);
  SeededRng rng(47, 0);
  const JumpDescriptor huge = JumpDescriptor::normal_walk(60.0);  // mostly rejected
  int rejected_and_refreshed = 0;
  for (int i = 0; i < 200; ++i) {
    const double b_before = state.scalar("b");
    const MhOutcome o = star_kernel_update(
        [&](const ComponentState& s) { return model.log_target(reduced, s); }, huge,
        [&](ComponentState& s, SeededRng& r) { model.draw_exact(trailing, s, r); }, state,
        {"a"}, rng);
    if (!o.accepted && state.scalar("b") != b_before) ++rejected_and_refreshed;
  }
  CHECK(rejected_and_refreshed > 100);
}

TEST_CASE("star kernel sweep preserves the trivariate normal target") {
  Eigen::Matrix3d cov;
  cov << 1.0, 0.6, 0.3, 0.6, 1.0, 0.5, 0.3, 0.5, 1.0;
  const GaussianModel model({"a", "b", "c"}, Eigen::Vector3d::Zero(), cov);
  // Sweep: star (inner a against p(a|c), trailing b), then an exact c draw.
  const StepSets reduced{{"a"}, {"c"}, {"b"}};
  const StepSets trailing{{"b"}, make_set({"a", "c"}), {}};
  const StepSets c_draw{{"c"}, make_set({"a", "b"}), {}};
  ComponentState state;
  state.set("a", 0.0);
  state.set("b", 0.0);
  state.set("c", 0.0);
  SeededRng rng(53, 0);
  const JumpDescriptor walk = JumpDescriptor::normal_walk(1.5);
  const int t = 100000;
  std::vector<double> xa(t), xb(t), xc(t);
  for (int i = 0; i < t; ++i) {
    star_kernel_update([&](const ComponentState& s) { return model.log_target(reduced, s); },
                       walk,
                       [&](ComponentState& s, SeededRng& r) { model.draw_exact(trailing, s, r); },
                       state, {"a"}, rng);
    model.draw_exact(c_draw, state, rng);
    xa[static_cast<std::size_t>(i)] = state.scalar("a");
    xb[static_cast<std::size_t>(i)] = state.scalar("b");
    xc[static_cast<std::size_t>(i)] = state.scalar("c");
  }
  const double neff = std::min({ess(xa), ess(xb), ess(xc)});
  auto check_corr = [&](const std::vector<double>& x, const std::vector<double>& y,
                        double truth) {
    const double r = correlation(x, y);
    const double se = (1.0 - truth * truth) / std::sqrt(neff);
    CHECK(std::fabs(r - truth) < 3.0 * se);
  };
  check_corr(xa, xb, 0.6);
  check_corr(xa, xc, 0.3);
  check_corr(xb, xc, 0.5);
}

TEST_CASE("detailed balance on a five-state target") {
  const std::vector<double> weights{0.35, 0.05, 0.25, 0.2, 0.15};
  ComponentState state;
  state.set("k", std::int64_t{1});
  const auto target = [&](const ComponentState& s) {
    return std::log(weights[static_cast<std::size_t>(s.integer("k") - 1)]);
  };
  const JumpDescriptor jump = JumpDescriptor::discrete_uniform(5);
  SeededRng rng(59, 0);
  Eigen::Matrix<long, 5, 5> flows = Eigen::Matrix<long, 5, 5>::Zero();
  std::int64_t prev = state.integer("k");
  for (int i = 0; i < 1000000; ++i) {
    mh_update(target, jump, state, {"k"}, rng);
    const std::int64_t cur = state.integer("k");
    flows(prev - 1, cur - 1) += 1;
    prev = cur;
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const double fij = static_cast<double>(flows(i, j));
      const double fji = static_cast<double>(flows(j, i));
      CHECK(std::fabs(fij - fji) <= 3.0 * std::sqrt(fij + fji));
    }
  }
}

TEST_CASE("rejected proposals leave the value bit-identical") {
  ComponentState state;
  state.set("x", 0.123456789);
  SeededRng rng(61, 0);
  const JumpDescriptor huge = JumpDescriptor::normal_walk(80.0);
  int rejections = 0;
  for (int i = 0; i < 500; ++i) {
    const double before = state.scalar("x");
    const MhOutcome o =
        mh_update(scalar_target("x", std_normal_log_pdf), huge, state, {"x"}, rng);
    if (!o.accepted) {
      ++rejections;
      const double after = state.scalar("x");
      CHECK(std::memcmp(&before, &after, sizeof(double)) == 0);
    }
  }
  CHECK(rejections > 400);
}

TEST_CASE("log-normal walk carries the jacobian in the correction") {
  // A log-scale walk targeting Gamma(3, 2) must leave the exact Gamma law
  // invariant; without the Jacobian the stationary law would be tilted by x.
  const DistSpec gamma_target = DistSpec::gamma(3.0, 2.0);
  ComponentState state;
  state.set("x", 1.0);
  const auto target = [&](const ComponentState& s) {
    return log_pdf(gamma_target, Value{s.scalar("x")});
  };
  const JumpDescriptor walk = JumpDescriptor::log_normal_walk(0.8);
  SeededRng rng(67, 0);
  const int t = 200000;
  std::vector<double> draws(t);
  for (int i = 0; i < t; ++i) {
    mh_update(target, walk, state, {"x"}, rng);
    draws[static_cast<std::size_t>(i)] = state.scalar("x");
  }
  const double neff = ess(draws);
  CHECK(std::fabs(mean(draws) - 1.5) < 4.0 * std::sqrt((3.0 / 4.0) / neff));
  CHECK(std::fabs(variance(draws) - 0.75) < 0.05);
}

TEST_CASE("non-finite target densities are surfaced") {
  ComponentState state;
  state.set("x", 1.0);
  SeededRng rng(71, 0);
  const auto nan_target = [](const ComponentState&) { return std::nan(""); };
  CHECK_THROWS_AS(
      mh_update(nan_target, JumpDescriptor::normal_walk(1.0), state, {"x"}, rng),
      NonFiniteDensity);
}

TEST_CASE("scale tuning reaches the target acceptance band") {
  StepSpec step;
  step.kind = StepSpec::Kind::MH;
  step.samples = {"x"};
  step.jump = JumpDescriptor::normal_walk(1e-6, 0.4);
  ComponentState state;
  state.set("x", 0.0);

  SUBCASE("tiny initial scale grows while every proposal is accepted") {
    JumpDescriptor jump = *step.jump;
    ScaleTuner tuner(0.4);
    SeededRng rng(73, 0);
    double last_scale = jump.scale[0];
    bool saw_saturated_batch = false;
    for (int i = 0; i < 6000; ++i) {
      const MhOutcome o =
          mh_update(scalar_target("x", std_normal_log_pdf), jump, state, {"x"}, rng);
      const double f = tuner.record(o.accepted);
      if (f != 1.0) {
        if (tuner.last_batch_rate() > 0.99) {
          saw_saturated_batch = true;
          CHECK(f > 1.0);
          CHECK(jump.scale[0] >= last_scale);
        }
        last_scale = jump.scale[0];
        apply_scale_factor(jump, f);
      }
    }
    CHECK(saw_saturated_batch);
  }

  SUBCASE("pilot tuning lands within 0.10 of the target") {
    SeededRng rng(79, 0);
    const JumpDescriptor tuned = tune_scale(
        step, scalar_target("x", std_normal_log_pdf), state, 0.4, 20000, rng);
    ComponentState s2;
    s2.set("x", 0.0);
    SeededRng rng2(83, 0);
    int accepted = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      accepted += mh_update(scalar_target("x", std_normal_log_pdf), tuned, s2, {"x"}, rng2)
                      .accepted;
    }
    CHECK(std::fabs(static_cast<double>(accepted) / n - 0.4) < 0.10);
  }
}
