#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mhpcg/model.hpp"

namespace mhpcg {

/// Multivariate normal target over named scalar components. Every
/// conditional of every marginal is available in closed form, which makes
/// this the reference backend for kernel and validator checks.
class GaussianModel : public ModelBackend {
 public:
  GaussianModel(std::vector<ComponentId> components, Eigen::VectorXd mean,
                Eigen::MatrixXd cov, std::string name = "gaussian");

  std::string name() const override { return name_; }
  ComponentState initial_state() const override;

  void draw_exact(const StepSets& sets, ComponentState& state,
                  SeededRng& rng) const override;
  double log_target(const StepSets& sets, const ComponentState& state) const override;
  double log_exact_conditional(const StepSets& sets,
                               const ComponentState& state) const override;

  const std::vector<ComponentId>& components() const { return components_; }

 private:
  struct Conditional {
    Eigen::VectorXd mean_offset;  // mu_S - K * mu_C
    Eigen::MatrixXd gain;         // K = Sigma_SC Sigma_CC^-1
    Eigen::LLT<Eigen::MatrixXd> chol;
    double log_norm = 0.0;
  };
  Conditional conditional(const IdSet& samples, const IdSet& conditions) const;
  int index_of(const ComponentId& id) const;

  std::string name_;
  std::vector<ComponentId> components_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// The paper's two-component example: zero means, unit variances,
/// correlation rho (0.9 in the experiments).
class BivariateNormalModel : public ModelBackend {
 public:
  explicit BivariateNormalModel(double rho);

  double rho() const { return rho_; }

  std::string name() const override { return "bivariate"; }
  ComponentState initial_state() const override;
  void draw_exact(const StepSets& sets, ComponentState& state,
                  SeededRng& rng) const override;
  double log_target(const StepSets& sets, const ComponentState& state) const override;
  double log_exact_conditional(const StepSets& sets,
                               const ComponentState& state) const override;

  /// log p(psi2 | psi1) and friends, used directly by the strategy studies.
  double log_conditional(double value, double given) const;
  double draw_conditional(double given, SeededRng& rng) const;

 private:
  double rho_;
  GaussianModel inner_;
};

}  // namespace mhpcg
