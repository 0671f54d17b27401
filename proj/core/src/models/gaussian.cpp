#include "mhpcg/models/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mhpcg/errors.hpp"

namespace mhpcg {

namespace {
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);
}

GaussianModel::GaussianModel(std::vector<ComponentId> components, Eigen::VectorXd mean,
                             Eigen::MatrixXd cov, std::string name)
    : name_(std::move(name)),
      components_(std::move(components)),
      mean_(std::move(mean)),
      cov_(std::move(cov)) {
  const auto d = static_cast<Eigen::Index>(components_.size());
  if (mean_.size() != d || cov_.rows() != d || cov_.cols() != d) {
    throw InvalidParams("gaussian model: dimension mismatch");
  }
}

int GaussianModel::index_of(const ComponentId& id) const {
  const auto it = std::find(components_.begin(), components_.end(), id);
  if (it == components_.end()) throw MissingConditional("unknown component '" + id + "'");
  return static_cast<int>(it - components_.begin());
}

GaussianModel::Conditional GaussianModel::conditional(const IdSet& samples,
                                                      const IdSet& conditions) const {
  std::vector<int> si, ci;
  for (const auto& id : samples) si.push_back(index_of(id));
  for (const auto& id : conditions) ci.push_back(index_of(id));
  const Eigen::Index ns = static_cast<Eigen::Index>(si.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(ci.size());

  Eigen::VectorXd mu_s(ns), mu_c(nc);
  Eigen::MatrixXd s_ss(ns, ns), s_sc(ns, nc), s_cc(nc, nc);
  for (Eigen::Index i = 0; i < ns; ++i) {
    mu_s[i] = mean_[si[i]];
    for (Eigen::Index j = 0; j < ns; ++j) s_ss(i, j) = cov_(si[i], si[j]);
    for (Eigen::Index j = 0; j < nc; ++j) s_sc(i, j) = cov_(si[i], ci[j]);
  }
  for (Eigen::Index i = 0; i < nc; ++i) {
    mu_c[i] = mean_[ci[i]];
    for (Eigen::Index j = 0; j < nc; ++j) s_cc(i, j) = cov_(ci[i], ci[j]);
  }

  Conditional cond;
  if (nc > 0) {
    const Eigen::MatrixXd gain = s_cc.llt().solve(s_sc.transpose()).transpose();
    cond.gain = gain;
    cond.mean_offset = mu_s - gain * mu_c;
    s_ss -= gain * s_sc.transpose();
    // Guard against tiny asymmetry from the solve.
    s_ss = 0.5 * (s_ss + s_ss.transpose());
  } else {
    cond.gain.resize(ns, 0);
    cond.mean_offset = mu_s;
  }
  cond.chol.compute(s_ss);
  if (cond.chol.info() != Eigen::Success) {
    throw InvalidParams("gaussian conditional covariance not positive definite");
  }
  double log_det_l = 0.0;
  for (Eigen::Index i = 0; i < ns; ++i) log_det_l += std::log(cond.chol.matrixL()(i, i));
  cond.log_norm = -0.5 * static_cast<double>(ns) * kLogTwoPi - log_det_l;
  return cond;
}

ComponentState GaussianModel::initial_state() const {
  ComponentState s;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    s.set(components_[i], mean_[static_cast<Eigen::Index>(i)]);
  }
  return s;
}

void GaussianModel::draw_exact(const StepSets& sets, ComponentState& state,
                               SeededRng& rng) const {
  const Conditional cond = conditional(sets.samples, sets.conditions_on);
  const Eigen::Index ns = static_cast<Eigen::Index>(sets.samples.size());
  Eigen::VectorXd xc(static_cast<Eigen::Index>(sets.conditions_on.size()));
  for (Eigen::Index i = 0; i < xc.size(); ++i) {
    xc[i] = state.scalar(sets.conditions_on[static_cast<std::size_t>(i)]);
  }
  Eigen::VectorXd z(ns);
  for (Eigen::Index i = 0; i < ns; ++i) z[i] = rng.normal();
  const Eigen::VectorXd x =
      cond.mean_offset + cond.gain * xc + cond.chol.matrixL() * z;
  for (Eigen::Index i = 0; i < ns; ++i) {
    state.set(sets.samples[static_cast<std::size_t>(i)], x[i]);
  }
}

double GaussianModel::log_target(const StepSets& sets, const ComponentState& state) const {
  const Conditional cond = conditional(sets.samples, sets.conditions_on);
  Eigen::VectorXd xs(static_cast<Eigen::Index>(sets.samples.size()));
  Eigen::VectorXd xc(static_cast<Eigen::Index>(sets.conditions_on.size()));
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    xs[i] = state.scalar(sets.samples[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < xc.size(); ++i) {
    xc[i] = state.scalar(sets.conditions_on[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd dev = xs - (cond.mean_offset + cond.gain * xc);
  const Eigen::VectorXd z = cond.chol.matrixL().solve(dev);
  return cond.log_norm - 0.5 * z.squaredNorm();
}

double GaussianModel::log_exact_conditional(const StepSets& sets,
                                            const ComponentState& state) const {
  return log_target(sets, state);  // already normalized
}

BivariateNormalModel::BivariateNormalModel(double rho)
    : rho_(rho),
      inner_({"psi1", "psi2"}, Eigen::Vector2d::Zero(),
             (Eigen::Matrix2d() << 1.0, rho, rho, 1.0).finished(), "bivariate") {
  if (!(rho > -1.0) || !(rho < 1.0)) throw InvalidParams("rho must lie in (-1,1)");
}

ComponentState BivariateNormalModel::initial_state() const {
  return inner_.initial_state();
}

void BivariateNormalModel::draw_exact(const StepSets& sets, ComponentState& state,
                                      SeededRng& rng) const {
  inner_.draw_exact(sets, state, rng);
}

double BivariateNormalModel::log_target(const StepSets& sets,
                                        const ComponentState& state) const {
  return inner_.log_target(sets, state);
}

double BivariateNormalModel::log_exact_conditional(const StepSets& sets,
                                                   const ComponentState& state) const {
  return inner_.log_exact_conditional(sets, state);
}

double BivariateNormalModel::log_conditional(double value, double given) const {
  const double var = 1.0 - rho_ * rho_;
  const double dev = value - rho_ * given;
  return -0.5 * kLogTwoPi - 0.5 * std::log(var) - 0.5 * dev * dev / var;
}

double BivariateNormalModel::draw_conditional(double given, SeededRng& rng) const {
  return rho_ * given + std::sqrt(1.0 - rho_ * rho_) * rng.normal();
}

}  // namespace mhpcg
