#include "mhpcg/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mhpcg/errors.hpp"
#include "mhpcg/kernels.hpp"
#include "mhpcg/models/gaussian.hpp"

namespace mhpcg {

using nlohmann::json;

namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

}  // namespace

ExperimentConfig config_from_json(const std::string& json_text) {
  const json in = json::parse(json_text);
  ExperimentConfig c;
  c.experiment = in.value("experiment", std::string{});
  if (in.contains("samplers")) c.samplers = in["samplers"].get<std::vector<std::string>>();
  c.iterations = in.value("T", c.iterations);
  c.burnin = in.value("burnin", c.burnin);
  if (in.contains("seeds")) c.seeds = in["seeds"].get<std::vector<std::uint64_t>>();
  if (in.contains("seed")) c.seeds = {in["seed"].get<std::uint64_t>()};
  if (in.contains("out")) c.out_dir = in["out"].get<std::string>();
  if (in.contains("dataset")) c.dataset = in["dataset"].get<std::string>();
  if (in.contains("basis")) c.basis = in["basis"].get<std::string>();
  c.sim_seed = in.value("sim_seed", c.sim_seed);
  c.rho = in.value("rho", c.rho);
  c.jump_scale = in.value("jump_scale", c.jump_scale);
  c.lemma_replications = in.value("N", c.lemma_replications);
  c.identity_configs = in.value("configs", c.identity_configs);
  c.factor_p = in.value("p", c.factor_p);
  c.factor_q = in.value("q", c.factor_q);
  c.factor_n = in.value("n", c.factor_n);
  c.calibration_q = in.value("calibration_q", c.calibration_q);
  c.iterated_l = in.value("L", c.iterated_l);
  c.gnuplot = in.value("gnuplot", c.gnuplot);
  if (in.contains("trace_components")) {
    c.trace_components = in["trace_components"].get<std::vector<std::string>>();
  }
  if (in.contains("diagnostics_components")) {
    c.diagnostics_components = in["diagnostics_components"].get<std::vector<std::string>>();
  }
  if (c.iterations <= 0 || c.burnin < 0) {
    throw std::invalid_argument("config: need T > 0 and burnin >= 0");
  }
  if (c.seeds.empty()) throw std::invalid_argument("config: at least one seed");
  return c;
}

ExperimentConfig config_from_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return config_from_json(buf.str());
}

void write_counts_csv(const std::filesystem::path& path, const Eigen::VectorXd& energies,
                      const Eigen::VectorXi& counts) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::fputs("energy,count\n", f);
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    std::fprintf(f, "%.17g,%d\n", energies[i], counts[i]);
  }
  std::fclose(f);
}

std::pair<Eigen::VectorXd, Eigen::VectorXi> read_counts_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> e;
  std::vector<int> x;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad dataset row: " + line);
    e.push_back(std::stod(line.substr(0, comma)));
    x.push_back(std::stoi(line.substr(comma + 1)));
  }
  Eigen::VectorXd energies = Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
  Eigen::VectorXi counts = Eigen::Map<Eigen::VectorXi>(x.data(), static_cast<Eigen::Index>(x.size()));
  return {energies, counts};
}

void write_matrix_csv(const std::filesystem::path& path, const std::string& column_prefix,
                      const Eigen::MatrixXd& m) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    std::fprintf(f, "%s%s%lld", j ? "," : "", column_prefix.c_str(),
                 static_cast<long long>(j + 1));
  }
  std::fputc('\n', f);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::fprintf(f, "%s%.17g", j ? "," : "", m(i, j));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty matrix file");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::shared_ptr<SpectralModel> make_blocking_study_model(std::uint64_t sim_seed) {
  const SpectralParams truth = spectral_sim_params();
  const Eigen::VectorXd energies = energy_grid(550, 0.3, 7.0);
  SeededRng rng(sim_seed, 777);
  return std::make_shared<SpectralModel>(energies, simulate_spectral(truth, energies, rng));
}

std::shared_ptr<CalibrationModel> make_calibration_study_model(std::uint64_t sim_seed, int q,
                                                               PcaBasis* basis_out) {
  const Eigen::VectorXd energies = calibration_energy_grid();
  SeededRng rng(sim_seed, 778);
  const PcaBasis basis = synthesize_pca_basis(energies, q, rng);
  const Eigen::VectorXd z_true = Eigen::VectorXd::Constant(q, 1.5);
  const Eigen::VectorXi counts = simulate_calibration(basis, energies, z_true, 30.0, 1.0, rng);
  if (basis_out) *basis_out = basis;
  return std::make_shared<CalibrationModel>(energies, counts, basis);
}

std::shared_ptr<FactorModel> make_factor_study_model(std::uint64_t sim_seed, int p, int q,
                                                     int n) {
  SeededRng rng(sim_seed, 779);
  const FactorSimulation sim = simulate_factor(p, q, n, rng);
  return std::make_shared<FactorModel>(sim.y, q);
}

std::shared_ptr<const ModelBackend> build_model(const std::string& model_ref,
                                                const ExperimentConfig& config) {
  if (model_ref == "bivariate") {
    return std::make_shared<BivariateNormalModel>(config.rho);
  }
  if (model_ref == "spectral") {
    if (config.dataset) {
      auto [e, x] = read_counts_csv(*config.dataset);
      return std::make_shared<SpectralModel>(e, x);
    }
    return make_blocking_study_model(config.sim_seed);
  }
  if (model_ref == "calibration") {
    if (config.dataset && config.basis) {
      auto [e, y] = read_counts_csv(*config.dataset);
      return std::make_shared<CalibrationModel>(e, y, read_pca_basis_csv(*config.basis));
    }
    return make_calibration_study_model(config.sim_seed, config.calibration_q, nullptr);
  }
  if (model_ref == "factor") {
    if (config.dataset) {
      return std::make_shared<FactorModel>(read_matrix_csv(*config.dataset), config.factor_q);
    }
    return make_factor_study_model(config.sim_seed, config.factor_p, config.factor_q,
                                   config.factor_n);
  }
  if (model_ref == "gaussian3") {
    Eigen::Matrix3d cov;
    cov << 1.0, 0.6, 0.3, 0.6, 1.0, 0.5, 0.3, 0.5, 1.0;
    return std::make_shared<GaussianModel>(
        std::vector<ComponentId>{"psi1", "psi2", "psi3"}, Eigen::Vector3d::Zero(), cov,
        "gaussian3");
  }
  if (model_ref == "gaussian4") {
    Eigen::Matrix4d cov;
    cov << 1.0, 0.5, 0.3, 0.2,
           0.5, 1.0, 0.4, 0.3,
           0.3, 0.4, 1.0, 0.5,
           0.2, 0.3, 0.5, 1.0;
    return std::make_shared<GaussianModel>(
        std::vector<ComponentId>{"psi1", "psi2", "psi3", "psi4"}, Eigen::Vector4d::Zero(),
        cov, "gaussian4");
  }
  throw std::invalid_argument("no model backend for '" + model_ref + "'");
}

std::vector<std::string> default_diagnostics(const std::string& model_ref, int q, int p) {
  if (model_ref == "bivariate") return {"psi1", "psi2"};
  if (model_ref == "spectral") return {"alpha", "beta", "gamma", "mu", "phi"};
  if (model_ref == "calibration") {
    std::vector<std::string> cols{"alpha", "beta"};
    for (int k = 1; k <= q; ++k) cols.push_back("Z[" + std::to_string(k) + "]");
    return cols;
  }
  if (model_ref == "factor") {
    std::vector<std::string> cols;
    for (int j = 1; j <= p; ++j) cols.push_back("sigma_sq_" + std::to_string(j));
    return cols;
  }
  return {};
}

std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& config) {
  ensure_dir(config.out_dir);
  std::vector<std::filesystem::path> files;
  json prov;
  prov["seed"] = config.sim_seed;
  prov["experiment"] = config.experiment;
  if (config.experiment == "spectral") {
    const SpectralParams truth = spectral_sim_params();
    const Eigen::VectorXd energies = energy_grid(550, 0.3, 7.0);
    SeededRng rng(config.sim_seed, 777);
    const Eigen::VectorXi counts = simulate_spectral(truth, energies, rng);
    const auto path = config.out_dir / "spectral.csv";
    write_counts_csv(path, energies, counts);
    files.push_back(path);
    prov["params"] = {{"alpha", truth.alpha}, {"beta", truth.beta},
                      {"gamma", truth.gamma}, {"mu", truth.mu},
                      {"phi", truth.phi},     {"bins", 550},
                      {"grid", {0.3, 7.0}}};
  } else if (config.experiment == "calibration") {
    const Eigen::VectorXd energies = calibration_energy_grid();
    SeededRng rng(config.sim_seed, 778);
    const PcaBasis basis = synthesize_pca_basis(energies, config.calibration_q, rng);
    const Eigen::VectorXd z_true = Eigen::VectorXd::Constant(config.calibration_q, 1.5);
    const Eigen::VectorXi counts =
        simulate_calibration(basis, energies, z_true, 30.0, 1.0, rng);
    const auto data_path = config.out_dir / "calibration.csv";
    const auto basis_path = config.out_dir / "calibration_basis.csv";
    write_counts_csv(data_path, energies, counts);
    write_pca_basis_csv(basis, basis_path);
    files.push_back(data_path);
    files.push_back(basis_path);
    prov["params"] = {{"alpha", 30.0}, {"beta", 1.0}, {"z", 1.5},
                      {"q", config.calibration_q}, {"bins", 1078}};
  } else if (config.experiment == "factor") {
    SeededRng rng(config.sim_seed, 779);
    const FactorSimulation sim =
        simulate_factor(config.factor_p, config.factor_q, config.factor_n, rng);
    const auto path = config.out_dir / "factor.csv";
    write_matrix_csv(path, "y", sim.y);
    files.push_back(path);
    prov["params"] = {{"p", config.factor_p}, {"q", config.factor_q}, {"n", config.factor_n},
                      {"sigma_prior", "inv-gamma(1, 0.25)"}, {"loading_prior", "normal(0, 9)"}};
  } else {
    throw std::invalid_argument("simulate: unknown experiment '" + config.experiment + "'");
  }
  write_text(config.out_dir / (config.experiment + "_provenance.json"), prov.dump(2));
  files.push_back(config.out_dir / (config.experiment + "_provenance.json"));
  return files;
}

namespace {

json diagnostics_json(const Trace& trace, const std::vector<std::string>& columns) {
  json out;
  for (const auto& col : columns) {
    if (!trace.has_column(col)) continue;
    const std::vector<double> s = trace.series(col);
    json d;
    d["mean"] = mean(s);
    d["variance"] = variance(s);
    bool degenerate = true;
    for (double v : s) {
      if (v != s.front()) {
        degenerate = false;
        break;
      }
    }
    if (!degenerate) {
      d["ess"] = ess(s);
      d["lag1_acf"] = acf(s, 1).at(1);
    }
    out[col] = std::move(d);
  }
  return out;
}

}  // namespace

RunReport cmd_run(const ExperimentConfig& config) {
  ensure_dir(config.out_dir);
  RunReport report;
  if (config.samplers.empty()) {
    throw std::invalid_argument("run: no samplers named");
  }
  RegistryConfig reg_config;
  reg_config.calibration_q = config.calibration_q;
  reg_config.factor_p = config.factor_p;
  reg_config.iterated_l_calibration = config.iterated_l;

  std::shared_ptr<const ModelBackend> model;
  std::vector<std::string> diag_cols = config.diagnostics_components;
  for (const auto& name : config.samplers) {
    const SamplerSpec spec = registry_get(name, reg_config);
    if (!model) {
      model = build_model(spec.model_ref, config);
      if (diag_cols.empty()) {
        diag_cols = default_diagnostics(spec.model_ref, config.calibration_q, config.factor_p);
      }
    }
    RunOptions opt;
    opt.iterations = config.iterations;
    opt.burnin = config.burnin;
    opt.seed = config.seeds.front();
    opt.record = config.trace_components;
    const Trace trace = run_sampler(spec, *model, opt);

    const auto trace_path = config.out_dir / (name + "_trace.csv");
    const auto sidecar_path = config.out_dir / (name + "_trace.json");
    const auto diag_path = config.out_dir / (name + "_diagnostics.json");
    trace.write_csv(trace_path);
    trace.write_sidecar_json(sidecar_path);
    json diag;
    diag["sampler"] = name;
    diag["components"] = diagnostics_json(trace, diag_cols);
    json acc = json::array();
    for (const auto& log : trace.acceptance) {
      acc.push_back({{"step", log.step_index},
                     {"samples", log.samples},
                     {"rate", log.acceptance_rate()}});
    }
    diag["acceptance"] = std::move(acc);
    write_text(diag_path, diag.dump(2));
    report.files.insert(report.files.end(), {trace_path, sidecar_path, diag_path});
    report.runs.push_back({name, trace});
  }

  if (report.runs.size() >= 2) {
    std::vector<std::string> present;
    for (const auto& col : diag_cols) {
      if (report.runs[0].trace.has_column(col) && report.runs[1].trace.has_column(col)) {
        present.push_back(col);
      }
    }
    report.comparison =
        compare_traces(report.runs[0].trace, report.runs[1].trace, present);
    const auto cmp_path = config.out_dir / ("comparison_" + report.runs[0].sampler + "_vs_" +
                                            report.runs[1].sampler + ".json");
    write_text(cmp_path, report.comparison->to_json());
    report.files.push_back(cmp_path);
  }

  if (config.gnuplot) {
    std::ostringstream gp;
    gp << "set datafile separator ','\n";
    for (const auto& run : report.runs) {
      gp << "# trace of " << run.sampler << "\n";
      gp << "plot '" << run.sampler << "_trace.csv' using 0:1 with lines title '"
         << run.sampler << "'\n";
      gp << "pause -1\n";
    }
    const auto gp_path = config.out_dir / "plots.gp";
    write_text(gp_path, gp.str());
    report.files.push_back(gp_path);
  }
  return report;
}

Verdict cmd_validate(const std::string& name_or_path) {
  SamplerSpec spec;
  std::optional<SamplerSpec> parent;
  const auto registry = sampler_registry();
  const auto it = registry.find(name_or_path);
  if (it != registry.end()) {
    spec = it->second;
    if (const auto parent_name = registry_parent_name(name_or_path)) {
      parent = registry.at(*parent_name);
    }
  } else {
    std::ifstream f(name_or_path);
    if (!f) {
      throw std::invalid_argument("'" + name_or_path +
                                  "' is neither a registered sampler nor a readable file");
    }
    std::stringstream buf;
    buf << f.rdbuf();
    spec = sampler_spec_from_json(buf.str());
  }
  return validate(spec, parent ? &*parent : nullptr);
}

Lemma1Result cmd_lemma1(const ExperimentConfig& config) {
  ensure_dir(config.out_dir);
  const BivariateNormalModel model(config.rho);
  const JumpDescriptor jump = JumpDescriptor::normal_walk(config.jump_scale);
  SeededRng rng(config.seeds.front(), 4242);
  const Lemma1Result res = lemma1_check(model, jump, config.lemma_replications, rng);
  json out;
  out["rho"] = config.rho;
  out["replications"] = config.lemma_replications;
  out["mean_ratio"] = res.mean_ratio;
  out["mean_log_ratio"] = res.mean_log_ratio;
  out["ci99_log"] = {res.ci99_log_lo, res.ci99_log_hi};
  out["ci99_ratio"] = {res.ci99_ratio_lo, res.ci99_ratio_hi};
  out["max_identity_gap"] = res.max_identity_gap;
  write_text(config.out_dir / "lemma1.json", out.dump(2));
  return res;
}

IdentityCheckReport cmd_blocked_identity(const ExperimentConfig& config) {
  ensure_dir(config.out_dir);
  IdentityCheckReport report;
  report.configs = config.identity_configs;
  SeededRng rng(config.seeds.front(), 515151);

  // Gaussian toy: fragment-6/7 pattern with psi1 walked, psi2 drawn exactly.
  {
    const auto model = build_model("gaussian3", config);
    const IdSet walk_set{"psi1"};
    const IdSet exact_set{"psi2"};
    const StepSets joint_sets{make_set({"psi1", "psi2"}), {"psi3"}, {}};
    const StepSets exact_sets{exact_set, make_set({"psi1", "psi3"}), {}};
    const StepSets marg_sets{walk_set, {"psi3"}, {"psi2"}};
    for (int c = 0; c < config.identity_configs / 2; ++c) {
      ComponentState state;
      state.set("psi1", 2.0 * rng.normal());
      state.set("psi2", 2.0 * rng.normal());
      state.set("psi3", 2.0 * rng.normal());
      const JumpDescriptor walk =
          JumpDescriptor::normal_walk(0.2 + 2.0 * rng.uniform());
      SeededRng fork_a = rng;
      SeededRng fork_b = rng;
      ComponentState sa = state;
      const MhOutcome blocked = blocked_mh_update(
          walk,
          [&](ComponentState& s, SeededRng& r) { model->draw_exact(exact_sets, s, r); },
          [&](const ComponentState& s) { return model->log_exact_conditional(exact_sets, s); },
          [&](const ComponentState& s) { return model->log_target(joint_sets, s); }, sa,
          walk_set, exact_set, fork_a);
      ComponentState sb = state;
      const MhOutcome plain = mh_update(
          [&](const ComponentState& s) { return model->log_target(marg_sets, s); }, walk, sb,
          walk_set, fork_b);
      rng = fork_a;
      report.max_gap_gaussian =
          std::max(report.max_gap_gaussian, std::fabs(blocked.log_r - plain.log_r));
    }
  }

  // Small random spectral instances: Sampler 7(a)'s blocked (alpha, beta)
  // update against the beta-only reduced update of Sampler 6.
  {
    for (int c = 0; c < config.identity_configs - config.identity_configs / 2; ++c) {
      const int n = 5 + static_cast<int>(rng.below(25));
      Eigen::VectorXd energies = energy_grid(n, 0.4, 6.0);
      Eigen::VectorXi counts(n);
      for (int i = 0; i < n; ++i) counts[i] = static_cast<int>(rng.below(12));
      counts[n / 2] += 3;
      const SpectralModel model(energies, counts);
      ComponentState state;
      state.set("alpha", 0.5 + 4.0 * rng.uniform());
      state.set("beta", -0.5 + 2.0 * rng.uniform());
      state.set("gamma", 0.2 + 2.0 * rng.uniform());
      state.set("mu", static_cast<std::int64_t>(1 + rng.below(static_cast<std::uint64_t>(n))));
      state.set("phi", 0.4 * rng.uniform());
      state.set("XL", Eigen::VectorXi(Eigen::VectorXi::Zero(n)));
      const JumpDescriptor walk =
          JumpDescriptor::normal_walk(0.05 + 0.5 * rng.uniform());
      const IdSet walk_set{"beta"};
      const IdSet exact_set{"alpha"};
      const StepSets joint_sets{make_set({"alpha", "beta"}), make_set({"gamma", "mu", "phi"}),
                                make_set({"XL"})};
      const StepSets exact_sets{exact_set, make_set({"beta", "gamma", "mu", "phi"}),
                                make_set({"XL"})};
      const StepSets marg_sets{walk_set, make_set({"gamma", "mu", "phi"}),
                               make_set({"XL", "alpha"})};
      SeededRng fork_a = rng;
      SeededRng fork_b = rng;
      ComponentState sa = state;
      const MhOutcome blocked = blocked_mh_update(
          walk,
          [&](ComponentState& s, SeededRng& r) { model.draw_exact(exact_sets, s, r); },
          [&](const ComponentState& s) { return model.log_exact_conditional(exact_sets, s); },
          [&](const ComponentState& s) { return model.log_target(joint_sets, s); }, sa,
          walk_set, exact_set, fork_a);
      ComponentState sb = state;
      const MhOutcome plain = mh_update(
          [&](const ComponentState& s) { return model.log_target(marg_sets, s); }, walk, sb,
          walk_set, fork_b);
      rng = fork_a;
      report.max_gap_spectral =
          std::max(report.max_gap_spectral, std::fabs(blocked.log_r - plain.log_r));
    }
  }

  json out;
  out["configs"] = report.configs;
  out["max_gap_gaussian"] = report.max_gap_gaussian;
  out["max_gap_spectral"] = report.max_gap_spectral;
  write_text(config.out_dir / "blocked_identity.json", out.dump(2));
  return report;
}

}  // namespace mhpcg
