#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mhpcg/diagnostics.hpp"
#include "mhpcg/models/calibration.hpp"
#include "mhpcg/models/factor.hpp"
#include "mhpcg/models/registry.hpp"
#include "mhpcg/models/spectral.hpp"
#include "mhpcg/runner.hpp"
#include "mhpcg/validator.hpp"

namespace mhpcg {

/// Batch experiment configuration; defaults mirror the simulation studies.
struct ExperimentConfig {
  std::string experiment;  // bivariate|spectral|calibration|factor|lemma1|blocked-identity
  std::vector<std::string> samplers;
  int iterations = 10000;  // post-burnin draws
  int burnin = 1000;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> dataset;  // counts / observations CSV
  std::optional<std::filesystem::path> basis;    // calibration PCA basis CSV
  std::uint64_t sim_seed = 20240101;             // dataset simulation stream

  double rho = 0.9;
  double jump_scale = 1.7320508075688772;  // sqrt(3): the walk with variance 3

  int lemma_replications = 100000;
  int identity_configs = 10000;

  int factor_p = 5;
  int factor_q = 2;
  int factor_n = 100;
  int calibration_q = 7;
  int iterated_l = 20;

  bool gnuplot = false;
  std::vector<ComponentId> trace_components;        // empty records everything
  std::vector<std::string> diagnostics_components;  // empty uses model defaults
};

ExperimentConfig config_from_json(const std::string& json_text);
ExperimentConfig config_from_json_file(const std::filesystem::path& path);

/// Dataset files: `energy,count` rows for the Poisson models, a wide y1..yp
/// matrix for the factor model. 17 significant digits throughout.
void write_counts_csv(const std::filesystem::path& path, const Eigen::VectorXd& energies,
                      const Eigen::VectorXi& counts);
std::pair<Eigen::VectorXd, Eigen::VectorXi> read_counts_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const std::string& column_prefix,
                      const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

/// Write dataset files plus a provenance JSON (seed and generating
/// parameters); returns the dataset paths written.
std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& config);

struct SamplerRun {
  std::string sampler;
  Trace trace;
};

struct RunReport {
  std::vector<SamplerRun> runs;
  std::optional<ComparisonReport> comparison;  // first two samplers
  std::vector<std::filesystem::path> files;
};

/// Run each named sampler on the experiment's model; emit trace CSV + JSON
/// sidecar, per-sampler diagnostics, and a pairwise comparison report.
RunReport cmd_run(const ExperimentConfig& config);

/// Verdict for a registry name or a spec JSON file, with the parent supplied
/// automatically for registered samplers.
Verdict cmd_validate(const std::string& name_or_path);

Lemma1Result cmd_lemma1(const ExperimentConfig& config);

struct IdentityCheckReport {
  double max_gap_gaussian = 0.0;
  double max_gap_spectral = 0.0;
  int configs = 0;
};

/// Eq-16-style identity: blocked and unblocked acceptance ratios agree to
/// floating-point accuracy over random configurations on a Gaussian toy and
/// on small random spectral instances.
IdentityCheckReport cmd_blocked_identity(const ExperimentConfig& config);

/// Diagnostic columns reported by default for each model.
std::vector<std::string> default_diagnostics(const std::string& model_ref, int q, int p);

/// Models for the registry's executable samplers, simulated deterministically
/// from config.sim_seed when no dataset is supplied.
std::shared_ptr<const ModelBackend> build_model(const std::string& model_ref,
                                                const ExperimentConfig& config);

/// The simulation-study models behind the figures.
std::shared_ptr<SpectralModel> make_blocking_study_model(std::uint64_t sim_seed);
std::shared_ptr<CalibrationModel> make_calibration_study_model(std::uint64_t sim_seed, int q,
                                                               PcaBasis* basis_out = nullptr);
std::shared_ptr<FactorModel> make_factor_study_model(std::uint64_t sim_seed, int p, int q,
                                                     int n);

}  // namespace mhpcg
