// Command-line harness: simulate datasets, run samplers, validate sampler
// specs, and reproduce the strategy-comparison studies. Exit codes: 0 ok,
// 1 validation failure, 2 runtime error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mhpcg/diagnostics.hpp"
#include "mhpcg/errors.hpp"
#include "mhpcg/experiments.hpp"
#include "mhpcg/models/gaussian.hpp"

namespace {

using namespace mhpcg;

void add_common(CLI::App* cmd, ExperimentConfig& config, std::string& config_path) {
  cmd->add_option("--seed", config.seeds, "chain seed(s); several run replications");
  cmd->add_option("--T", config.iterations, "post-burnin iterations");
  cmd->add_option("--burnin", config.burnin, "burnin iterations");
  cmd->add_option("--out", config.out_dir, "output directory");
  cmd->add_option("--config", config_path, "JSON config file (flags override)");
  cmd->add_option("--sim-seed", config.sim_seed, "dataset simulation seed");
}

ExperimentConfig merge_config(const ExperimentConfig& flags, const std::string& config_path,
                              const CLI::App* cmd) {
  if (config_path.empty()) return flags;
  ExperimentConfig file = config_from_json_file(config_path);
  // Flags win over the config file where explicitly given.
  ExperimentConfig merged = file;
  if (cmd->count("--seed")) merged.seeds = flags.seeds;
  if (cmd->count("--T")) merged.iterations = flags.iterations;
  if (cmd->count("--burnin")) merged.burnin = flags.burnin;
  if (cmd->count("--out")) merged.out_dir = flags.out_dir;
  if (cmd->count("--sim-seed")) merged.sim_seed = flags.sim_seed;
  if (!flags.samplers.empty()) merged.samplers = flags.samplers;
  if (!flags.experiment.empty()) merged.experiment = flags.experiment;
  return merged;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"MH-within-PCG sampler harness"};
  app.require_subcommand(1);

  ExperimentConfig config;
  std::string config_path;

  // simulate
  auto* simulate = app.add_subcommand("simulate", "write a simulated dataset + provenance");
  simulate->add_option("experiment", config.experiment, "spectral | calibration | factor")
      ->required();
  simulate->add_option("--p", config.factor_p, "factor model dimension p");
  simulate->add_option("--q", config.factor_q, "factor model dimension q");
  simulate->add_option("--n", config.factor_n, "factor model observations");
  add_common(simulate, config, config_path);

  // run
  auto* run = app.add_subcommand("run", "run samplers and emit traces + diagnostics");
  run->add_option("experiment", config.experiment,
                  "bivariate | spectral | calibration | factor")
      ->required();
  std::string samplers_csv;
  run->add_option("--samplers", samplers_csv, "comma-separated registry names")->required();
  run->add_option("--dataset", [&config](const std::vector<std::string>& v) {
        config.dataset = v.front();
        return true;
      }, "counts/observations CSV (simulated on the fly when omitted)");
  run->add_option("--basis", [&config](const std::vector<std::string>& v) {
        config.basis = v.front();
        return true;
      }, "calibration PCA basis CSV");
  run->add_option("--p", config.factor_p, "factor model dimension p");
  run->add_option("--q", config.factor_q, "factor model dimension q");
  run->add_option("--n", config.factor_n, "factor model observations");
  run->add_option("--rho", config.rho, "bivariate correlation");
  run->add_option("--trace-components", config.trace_components,
                  "components recorded in the trace (default: all)");
  run->add_flag("--gnuplot", config.gnuplot, "emit a companion gnuplot script");
  add_common(run, config, config_path);

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "propriety verdict for a sampler");
  std::string spec_name;
  validate_cmd->add_option("spec", spec_name, "registry name or spec JSON file")->required();
  validate_cmd->add_option("--out", config.out_dir, "output directory");

  // lemma1
  auto* lemma = app.add_subcommand("lemma1", "iterated-vs-joint acceptance ratio study");
  lemma->add_option("--rho", config.rho, "target correlation");
  lemma->add_option("--N", config.lemma_replications, "replications");
  lemma->add_option("--jump-scale", config.jump_scale, "walk standard deviation");
  add_common(lemma, config, config_path);

  // choose-l
  auto* choosel = app.add_subcommand("choose-l", "pilot run for the iterated-MH L");
  std::string conditional = "bivariate";
  double threshold = 0.05;
  int pilot = 5000;
  choosel->add_option("conditional", conditional, "bivariate | calibration");
  choosel->add_option("--threshold", threshold, "autocorrelation threshold");
  choosel->add_option("--pilot", pilot, "pilot iterations");
  choosel->add_option("--rho", config.rho, "bivariate correlation");
  add_common(choosel, config, config_path);

  // compare
  auto* compare = app.add_subcommand("compare", "two-trace comparison report");
  std::string trace_a, trace_b;
  std::vector<std::string> compare_cols;
  compare->add_option("trace_a", trace_a)->required();
  compare->add_option("trace_b", trace_b)->required();
  compare->add_option("--components", compare_cols, "columns to compare (default: shared)");
  compare->add_option("--out", config.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    const auto merged = merge_config(config, config_path, simulate);
    for (const auto& f : cmd_simulate(merged)) std::cout << f.string() << "\n";
    return 0;
  }
  if (run->parsed()) {
    ExperimentConfig merged = merge_config(config, config_path, run);
    if (!samplers_csv.empty()) {
      merged.samplers.clear();
      std::string token;
      std::stringstream ss(samplers_csv);
      while (std::getline(ss, token, ',')) merged.samplers.push_back(token);
    }
    const RunReport report = cmd_run(merged);
    for (const auto& f : report.files) std::cout << f.string() << "\n";
    return 0;
  }
  if (validate_cmd->parsed()) {
    const Verdict verdict = cmd_validate(spec_name);
    std::cout << verdict.to_json() << "\n" << verdict.text();
    return verdict.status == Verdict::Status::Unverifiable ? 1 : 0;
  }
  if (lemma->parsed()) {
    const auto merged = merge_config(config, config_path, lemma);
    const Lemma1Result res = cmd_lemma1(merged);
    std::printf("mean ratio      %.6f  (99%% CI %.6f..%.6f)\n", res.mean_ratio,
                res.ci99_ratio_lo, res.ci99_ratio_hi);
    std::printf("mean log ratio  %.6f  (99%% CI %.6f..%.6f)\n", res.mean_log_ratio,
                res.ci99_log_lo, res.ci99_log_hi);
    std::printf("identity gap    %.3e\n", res.max_identity_gap);
    return 0;
  }
  if (choosel->parsed()) {
    const auto merged = merge_config(config, config_path, choosel);
    SeededRng rng(merged.seeds.front(), 999);
    ChooseLResult result;
    if (conditional == "bivariate") {
      const BivariateNormalModel model(merged.rho);
      ComponentState state = model.initial_state();
      const StepSets sets{{"psi2"}, {"psi1"}, {}};
      result = choose_l(
          [&](const ComponentState& s) { return model.log_target(sets, s); },
          JumpDescriptor::normal_walk(merged.jump_scale), state, {"psi2"}, pilot, threshold,
          200, rng);
    } else if (conditional == "calibration") {
      const auto model = make_calibration_study_model(merged.sim_seed, merged.calibration_q,
                                                      nullptr);
      ComponentState state = model->initial_state();
      const StepSets sets{{"beta"}, {"Z"}, {"alpha"}};
      const SamplerSpec spec9 = registry_get("sampler9");
      const StepSpec& step = spec9.steps[1];
      const JumpDescriptor tuned = tune_scale(
          step, [&](const ComponentState& s) { return model->log_target(sets, s); }, state,
          *step.jump->tune_target, 4000, rng);
      result = choose_l(
          [&](const ComponentState& s) { return model->log_target(sets, s); }, tuned, state,
          {"beta"}, pilot, threshold, 400, rng);
    } else {
      std::cerr << "unknown conditional '" << conditional << "'\n";
      return 2;
    }
    std::printf("L* = %d (pilot acceptance %.3f)\n", result.l_star, result.acceptance_rate);
    return 0;
  }
  if (compare->parsed()) {
    const Trace a = Trace::read_csv(trace_a);
    const Trace b = Trace::read_csv(trace_b);
    std::vector<std::string> cols = compare_cols;
    if (cols.empty()) {
      for (const auto& c : a.columns()) {
        if (b.has_column(c)) cols.push_back(c);
      }
    }
    const ComparisonReport report = compare_traces(a, b, cols);
    std::filesystem::create_directories(config.out_dir);
    const auto path = config.out_dir / "comparison.json";
    std::ofstream f(path);
    f << report.to_json() << "\n";
    std::cout << path.string() << "\n";
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
