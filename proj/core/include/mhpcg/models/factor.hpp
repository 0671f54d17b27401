#pragma once

#include <Eigen/Core>

#include "mhpcg/model.hpp"

namespace mhpcg {

struct FactorSimulation {
  Eigen::MatrixXd y;           // n x p observations
  Eigen::MatrixXd z_true;      // n x q
  Eigen::MatrixXd beta_true;   // q x p
  Eigen::VectorXd sigma_true;  // p variances
};

/// The robustness design: sigma_j^2 ~ Inv-Gamma(1, 0.25), loadings ~ N(0, 3^2),
/// scores ~ N_q(0, I), observations per the factor model.
FactorSimulation simulate_factor(int p, int q, int n, SeededRng& rng);

/// Gaussian factor model Y_i ~ N_p(Z_i beta, Sigma) with Sigma diagonal,
/// standard normal priors on the scores, N_q(0, V) columns of loadings and
/// Inv-Gamma(a, b) variances. Components: Z (n x q), sigma_sq_1..p, beta
/// (q x p). The q = 2 appendix formulas are implemented for general q.
class FactorModel : public ModelBackend {
 public:
  FactorModel(Eigen::MatrixXd y, int q, double a = 0.01, double b = 0.01,
              double v_diag = 100.0);

  std::string name() const override { return "factor"; }
  ComponentState initial_state() const override;
  void draw_exact(const StepSets& sets, ComponentState& state,
                  SeededRng& rng) const override;
  double log_target(const StepSets& sets, const ComponentState& state) const override;

  int n() const { return static_cast<int>(y_.rows()); }
  int p() const { return static_cast<int>(y_.cols()); }
  int q() const { return q_; }
  const Eigen::MatrixXd& y() const { return y_; }

  static ComponentId sigma_id(int j) { return "sigma_sq_" + std::to_string(j); }
  std::vector<ComponentId> component_order() const;

  /// Log joint of (Z, beta, Sigma) given Y including the priors.
  double log_joint_augmented(const Eigen::MatrixXd& z, const Eigen::MatrixXd& beta,
                             const Eigen::VectorXd& sigma_sq) const;

  /// Log p(beta, Sigma | Y): the scores integrated out, with the
  /// |I_q + beta Sigma^-1 beta^T|^(-n/2) term from a stable factorization.
  double log_scores_marginal(const Eigen::MatrixXd& beta,
                             const Eigen::VectorXd& sigma_sq) const;

  Eigen::MatrixXd draw_scores(const Eigen::MatrixXd& beta, const Eigen::VectorXd& sigma_sq,
                              SeededRng& rng) const;
  double draw_sigma_sq(int j, const Eigen::MatrixXd& z, const Eigen::MatrixXd& beta,
                       SeededRng& rng) const;
  Eigen::MatrixXd draw_loadings(const Eigen::MatrixXd& z, const Eigen::VectorXd& sigma_sq,
                                SeededRng& rng) const;

  double prior_a() const { return a_; }
  double prior_b() const { return b_; }

 private:
  Eigen::VectorXd sigma_of(const ComponentState& state) const;

  Eigen::MatrixXd y_;
  int q_ = 0;
  double a_ = 0.01;
  double b_ = 0.01;
  double v_diag_ = 100.0;
  Eigen::MatrixXd yty_;  // p x p Gram matrix of the observations
};

}  // namespace mhpcg
