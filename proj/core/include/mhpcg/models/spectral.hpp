#pragma once

#include <Eigen/Core>

#include "mhpcg/model.hpp"

namespace mhpcg {

/// Photon-count parameters of the spectral model: expected count in bin i is
///   Lambda_i = alpha (E_i^-beta + gamma 1{i = mu}) e^(-phi / E_i),
/// a power-law continuum with a single-bin emission line at bin mu and
/// low-energy absorption. mu is 1-based.
struct SpectralParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  std::int64_t mu = 1;
  double phi = 0.0;
};

/// Equally spaced energy grid on [lo, hi] (keV).
Eigen::VectorXd energy_grid(int n, double lo, double hi);

/// Draw counts X_i ~ Poisson(Lambda_i) independently.
Eigen::VectorXi simulate_spectral(const SpectralParams& params, const Eigen::VectorXd& energies,
                                  SeededRng& rng);

/// The simulation design of the blocking study: n = 550 bins, alpha = 37.62,
/// beta = 1, gamma = 40/37.62 (exact ratio, so alpha*gamma = 40), mu = 250,
/// phi = 0.2. The paper leaves the grid unspecified; [0.3, 7] keV is the
/// configurable default here.
SpectralParams spectral_sim_params();

/// Spectral model with X observed. Components: alpha, beta, gamma, mu
/// (integer), phi, XL (per-bin line counts). Flat priors on the continuous
/// parameters, uniform prior on mu over the bins.
class SpectralModel : public ModelBackend {
 public:
  SpectralModel(Eigen::VectorXd energies, Eigen::VectorXi counts);

  std::string name() const override { return "spectral"; }
  ComponentState initial_state() const override;
  void draw_exact(const StepSets& sets, ComponentState& state,
                  SeededRng& rng) const override;
  double log_target(const StepSets& sets, const ComponentState& state) const override;
  double log_exact_conditional(const StepSets& sets,
                               const ComponentState& state) const override;

  int bins() const { return static_cast<int>(energies_.size()); }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::VectorXi& counts() const { return counts_; }

  /// Sum over bins of (E_i^-beta + gamma 1{i=mu}) e^(-phi/E_i).
  double intensity_sum(const SpectralParams& p) const;

  /// Log posterior of (alpha, beta, gamma, mu, phi) given X, flat priors:
  /// the density with the line counts XL integrated out.
  double log_joint(const SpectralParams& p) const;

  /// Log joint of parameters and augmented line counts XL.
  double log_joint_augmented(const SpectralParams& p, const Eigen::VectorXi& xl) const;

  /// Log posterior with alpha (and XL) integrated out.
  double log_alpha_marginal(const SpectralParams& p) const;

  /// Exact conditional draws of the appendix step list.
  Eigen::VectorXi draw_line_counts(const SpectralParams& p, SeededRng& rng) const;
  double draw_alpha(const SpectralParams& p, SeededRng& rng) const;
  double draw_gamma(const SpectralParams& p, const Eigen::VectorXi& xl,
                    SeededRng& rng) const;

  /// Normalized log density of alpha's Gamma conditional.
  double log_alpha_conditional(const SpectralParams& p) const;

 private:
  SpectralParams params_of(const ComponentState& state) const;

  Eigen::VectorXd energies_;
  Eigen::VectorXi counts_;
  Eigen::ArrayXd log_e_;
  Eigen::ArrayXd inv_e_;
  Eigen::ArrayXd counts_d_;
  double sum_x_ = 0.0;
  double sum_x_log_e_ = 0.0;
  double sum_x_inv_e_ = 0.0;
};

}  // namespace mhpcg
