#pragma once

#include <Eigen/Core>
#include <filesystem>

#include "mhpcg/model.hpp"

namespace mhpcg {

/// Stand-in for the instrument calibration products: a smooth strictly
/// positive baseline effective-area curve A0 on the energy grid and q
/// orthogonal smooth perturbation columns Q, scaled so that A0 + QZ stays
/// positive for ||Z||_inf <= 4.
struct PcaBasis {
  Eigen::VectorXd a0;
  Eigen::MatrixXd q;
};

PcaBasis synthesize_pca_basis(const Eigen::VectorXd& energies, int q, SeededRng& rng);

/// CSV with columns A0,Q1..Qq; 17 significant digits, bit-exact round trip.
void write_pca_basis_csv(const PcaBasis& basis, const std::filesystem::path& path);
PcaBasis read_pca_basis_csv(const std::filesystem::path& path);

/// The calibration-uncertainty study's grid: 1078 bins from 0.225 to
/// 10.995 keV.
Eigen::VectorXd calibration_energy_grid();

/// Counts Y_j ~ Poisson(A_j(Z) alpha E_j^-beta).
Eigen::VectorXi simulate_calibration(const PcaBasis& basis, const Eigen::VectorXd& energies,
                                     const Eigen::VectorXd& z, double alpha, double beta,
                                     SeededRng& rng);

/// Poisson spectral model with an uncertain effective area A(Z) = A0 + QZ.
/// The target is the pragmatic posterior p(Z) p(alpha, beta | Z, Y): Z keeps
/// its standard normal prior as its marginal. Components: Z (q-vector),
/// alpha, beta; flat prior on (alpha, beta).
class CalibrationModel : public ModelBackend {
 public:
  CalibrationModel(Eigen::VectorXd energies, Eigen::VectorXi counts, PcaBasis basis);

  std::string name() const override { return "calibration"; }
  ComponentState initial_state() const override;
  void draw_exact(const StepSets& sets, ComponentState& state,
                  SeededRng& rng) const override;
  double log_target(const StepSets& sets, const ComponentState& state) const override;
  double log_exact_conditional(const StepSets& sets,
                               const ComponentState& state) const override;

  int bins() const { return static_cast<int>(energies_.size()); }
  int basis_size() const { return static_cast<int>(basis_.q.cols()); }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::VectorXi& counts() const { return counts_; }
  const PcaBasis& basis() const { return basis_; }

  /// A(Z); any nonpositive entry makes every density below -infinity.
  Eigen::VectorXd effective_area(const Eigen::VectorXd& z) const;

  /// Sum_j A_j(Z) E_j^-beta.
  double weighted_intensity(const Eigen::VectorXd& area, double beta) const;

  /// Log p(alpha, beta | Y, Z) up to a constant (flat prior).
  double log_joint_given_z(const Eigen::VectorXd& z, double alpha, double beta) const;

  /// Log p(beta | Y, Z): alpha integrated out analytically.
  double log_beta_marginal(const Eigen::VectorXd& z, double beta) const;

  double draw_alpha(const Eigen::VectorXd& z, double beta, SeededRng& rng) const;

 private:
  Eigen::VectorXd energies_;
  Eigen::VectorXi counts_;
  PcaBasis basis_;
  Eigen::ArrayXd log_e_;
  Eigen::ArrayXd counts_d_;
  double sum_y_ = 0.0;
  double sum_y_log_e_ = 0.0;
};

}  // namespace mhpcg
