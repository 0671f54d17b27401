#include "mhpcg/models/factor.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <numbers>

#include "mhpcg/errors.hpp"

namespace mhpcg {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

FactorSimulation simulate_factor(int p, int q, int n, SeededRng& rng) {
  if (p < q || q < 0 || n < 1) throw InvalidParams("simulate_factor: need p >= q >= 0");
  FactorSimulation sim;
  sim.sigma_true.resize(p);
  for (int j = 0; j < p; ++j) sim.sigma_true[j] = rng.inv_gamma(1.0, 0.25);
  sim.beta_true.resize(q, p);
  for (int h = 0; h < q; ++h) {
    for (int j = 0; j < p; ++j) sim.beta_true(h, j) = 3.0 * rng.normal();
  }
  sim.z_true.resize(n, q);
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < q; ++h) sim.z_true(i, h) = rng.normal();
  }
  sim.y.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      const double mean = q > 0 ? sim.z_true.row(i).dot(sim.beta_true.col(j)) : 0.0;
      sim.y(i, j) = mean + std::sqrt(sim.sigma_true[j]) * rng.normal();
    }
  }
  return sim;
}

FactorModel::FactorModel(Eigen::MatrixXd y, int q, double a, double b, double v_diag)
    : y_(std::move(y)), q_(q), a_(a), b_(b), v_diag_(v_diag) {
  if (q_ < 1 || q_ > static_cast<int>(y_.cols())) {
    throw InvalidParams("factor model: need 1 <= q <= p");
  }
  yty_ = y_.transpose() * y_;
}

std::vector<ComponentId> FactorModel::component_order() const {
  std::vector<ComponentId> order{"Z"};
  for (int j = 1; j <= p(); ++j) order.push_back(sigma_id(j));
  order.push_back("beta");
  return order;
}

ComponentState FactorModel::initial_state() const {
  ComponentState s;
  s.set("Z", Eigen::MatrixXd(Eigen::MatrixXd::Ones(n(), q_)));
  for (int j = 1; j <= p(); ++j) s.set(sigma_id(j), 1.0);
  s.set("beta", Eigen::MatrixXd(Eigen::MatrixXd::Ones(q_, p())));
  return s;
}

Eigen::VectorXd FactorModel::sigma_of(const ComponentState& state) const {
  Eigen::VectorXd sigma(p());
  for (int j = 1; j <= p(); ++j) sigma[j - 1] = state.scalar(sigma_id(j));
  return sigma;
}

double FactorModel::log_joint_augmented(const Eigen::MatrixXd& z, const Eigen::MatrixXd& beta,
                                        const Eigen::VectorXd& sigma_sq) const {
  if ((sigma_sq.array() <= 0.0).any()) return kNegInf;
  const double nd = static_cast<double>(n());
  double lp = -(0.5 * nd + a_ + 1.0) * sigma_sq.array().log().sum();
  lp -= b_ * sigma_sq.array().inverse().sum();
  const Eigen::MatrixXd resid = y_ - z * beta;
  for (int j = 0; j < p(); ++j) {
    lp -= 0.5 * resid.col(j).squaredNorm() / sigma_sq[j];
  }
  lp -= 0.5 * z.squaredNorm();
  lp -= 0.5 * beta.squaredNorm() / v_diag_;
  return lp;
}

double FactorModel::log_scores_marginal(const Eigen::MatrixXd& beta,
                                        const Eigen::VectorXd& sigma_sq) const {
  if ((sigma_sq.array() <= 0.0).any()) return kNegInf;
  const Eigen::VectorXd inv_sigma = sigma_sq.cwiseInverse();
  const Eigen::MatrixXd k = beta * inv_sigma.asDiagonal();  // q x p
  Eigen::MatrixXd m = k * beta.transpose();                 // I_q + beta Sigma^-1 beta^T
  m.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NonFiniteDensity("I + beta Sigma^-1 beta^T is not positive definite");
  }
  double log_det = 0.0;
  for (int i = 0; i < q_; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));

  const double nd = static_cast<double>(n());
  // trace(W YtY) with W = Sigma^-1 - Sigma^-1 beta^T M^-1 beta Sigma^-1.
  const double tr_direct = (yty_.diagonal().array() * inv_sigma.array()).sum();
  const Eigen::MatrixXd kg = k * yty_;                // q x p
  const Eigen::MatrixXd kgk = kg * k.transpose();     // q x q
  const double tr_reduction = llt.solve(kgk).trace();

  double lp = -0.5 * nd * log_det;
  lp += -(0.5 * nd + a_ + 1.0) * sigma_sq.array().log().sum();
  lp -= b_ * inv_sigma.sum();
  lp -= 0.5 * (tr_direct - tr_reduction);
  lp -= 0.5 * beta.squaredNorm() / v_diag_;
  return lp;
}

Eigen::MatrixXd FactorModel::draw_scores(const Eigen::MatrixXd& beta,
                                         const Eigen::VectorXd& sigma_sq,
                                         SeededRng& rng) const {
  const Eigen::VectorXd inv_sigma = sigma_sq.cwiseInverse();
  const Eigen::MatrixXd k = beta * inv_sigma.asDiagonal();
  Eigen::MatrixXd m = k * beta.transpose();
  m.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NonFiniteDensity("score precision is not positive definite");
  }
  // Posterior covariance is M^-1; factor it once for all n draws.
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(q_, q_));
  const Eigen::LLT<Eigen::MatrixXd> cov_llt(0.5 * (cov + cov.transpose()));
  const Eigen::MatrixXd means = y_ * k.transpose() * cov.transpose();  // n x q
  Eigen::MatrixXd z(n(), q_);
  Eigen::VectorXd noise(q_);
  for (int i = 0; i < n(); ++i) {
    for (int h = 0; h < q_; ++h) noise[h] = rng.normal();
    z.row(i) = means.row(i) + (cov_llt.matrixL() * noise).transpose();
  }
  return z;
}

double FactorModel::draw_sigma_sq(int j, const Eigen::MatrixXd& z,
                                  const Eigen::MatrixXd& beta, SeededRng& rng) const {
  const Eigen::VectorXd resid = y_.col(j - 1) - z * beta.col(j - 1);
  const double shape = a_ + 0.5 * static_cast<double>(n());
  const double scale = b_ + 0.5 * resid.squaredNorm();
  return rng.inv_gamma(shape, scale);
}

Eigen::MatrixXd FactorModel::draw_loadings(const Eigen::MatrixXd& z,
                                           const Eigen::VectorXd& sigma_sq,
                                           SeededRng& rng) const {
  const Eigen::MatrixXd ztz = z.transpose() * z;
  Eigen::MatrixXd beta(q_, p());
  Eigen::VectorXd noise(q_);
  for (int j = 0; j < p(); ++j) {
    Eigen::MatrixXd prec = ztz / sigma_sq[j];
    prec.diagonal().array() += 1.0 / v_diag_;
    const Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) {
      throw NonFiniteDensity("loading precision is not positive definite");
    }
    const Eigen::VectorXd mean = llt.solve(z.transpose() * y_.col(j) / sigma_sq[j]);
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(q_, q_));
    const Eigen::LLT<Eigen::MatrixXd> cov_llt(0.5 * (cov + cov.transpose()));
    for (int h = 0; h < q_; ++h) noise[h] = rng.normal();
    beta.col(j) = mean + cov_llt.matrixL() * noise;
  }
  return beta;
}

void FactorModel::draw_exact(const StepSets& sets, ComponentState& state,
                             SeededRng& rng) const {
  if (sets.samples == make_set({"Z"})) {
    state.set("Z", draw_scores(state.matrix("beta"), sigma_of(state), rng));
    return;
  }
  if (sets.samples == make_set({"beta"})) {
    state.set("beta", draw_loadings(state.matrix("Z"), sigma_of(state), rng));
    return;
  }
  // One sigma_sq_j or the whole block, each from its complete conditional
  // (they are conditionally independent given Z and beta).
  bool all_sigma = !sets.samples.empty();
  for (const auto& id : sets.samples) {
    if (id.rfind("sigma_sq_", 0) != 0) {
      all_sigma = false;
      break;
    }
  }
  if (all_sigma) {
    if (!sets.marginalized_out.empty()) {
      throw MissingConditional("sigma draws require Z in the conditioning set");
    }
    const Eigen::MatrixXd& z = state.matrix("Z");
    const Eigen::MatrixXd& beta = state.matrix("beta");
    for (int j = 1; j <= p(); ++j) {
      if (set_contains(sets.samples, sigma_id(j))) {
        state.set(sigma_id(j), draw_sigma_sq(j, z, beta, rng));
      }
    }
    return;
  }
  throw MissingConditional("factor model: no exact draw for this partition");
}

double FactorModel::log_target(const StepSets& sets, const ComponentState& state) const {
  if (sets.samples.size() == 1 && sets.samples[0].rfind("sigma_sq_", 0) == 0 &&
      sets.marginalized_out == make_set({"Z"})) {
    return log_scores_marginal(state.matrix("beta"), sigma_of(state));
  }
  if (sets.marginalized_out.empty()) {
    return log_joint_augmented(state.matrix("Z"), state.matrix("beta"), sigma_of(state));
  }
  throw MissingConditional("factor model: no target for this partition");
}

}  // namespace mhpcg
