#include <benchmark/benchmark.h>

#include "mhpcg/experiments.hpp"
#include "mhpcg/kernels.hpp"
#include "mhpcg/models/gaussian.hpp"
#include "mhpcg/models/registry.hpp"
#include "mhpcg/validator.hpp"

namespace {

using namespace mhpcg;

void BM_MhUpdateGaussian(benchmark::State& state) {
  const BivariateNormalModel model(0.9);
  ComponentState s = model.initial_state();
  SeededRng rng(7);
  const JumpDescriptor jump = JumpDescriptor::normal_walk(std::sqrt(3.0));
  const StepSets sets{{"psi2"}, {"psi1"}, {}};
  const auto target = [&](const ComponentState& st) { return model.log_target(sets, st); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(mh_update(target, jump, s, {"psi2"}, rng));
  }
}
BENCHMARK(BM_MhUpdateGaussian);

void BM_SpectralMarginalDensity(benchmark::State& state) {
  const auto model = make_blocking_study_model(1);
  ComponentState s = model->initial_state();
  const StepSets sets{{"beta"}, {"gamma", "mu", "phi"}, {"XL", "alpha"}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->log_target(sets, s));
  }
}
BENCHMARK(BM_SpectralMarginalDensity);

void BM_FactorScoreBlockDraw(benchmark::State& state) {
  const auto model = make_factor_study_model(1, 5, 2, 100);
  ComponentState s = model->initial_state();
  SeededRng rng(7);
  const StepSets sets{{"Z"}, {"beta", "sigma_sq_1", "sigma_sq_2", "sigma_sq_3",
                              "sigma_sq_4", "sigma_sq_5"}, {}};
  for (auto _ : state) {
    model->draw_exact(sets, s, rng);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_FactorScoreBlockDraw);

void BM_ValidateSampler11(benchmark::State& state) {
  const SamplerSpec spec = registry_get("sampler11");
  const SamplerSpec parent = registry_get("spectral_parent");
  for (auto _ : state) {
    benchmark::DoNotOptimize(validate(spec, &parent));
  }
}
BENCHMARK(BM_ValidateSampler11);

}  // namespace

BENCHMARK_MAIN();
