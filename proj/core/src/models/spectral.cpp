#include "mhpcg/models/spectral.hpp"

#include <cmath>
#include <limits>

#include "mhpcg/errors.hpp"

namespace mhpcg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + e^a) without overflow.
double softplus(double a) {
  if (a > 35.0) return a;
  if (a < -35.0) return std::exp(a);
  return std::log1p(std::exp(a));
}

}  // namespace

Eigen::VectorXd energy_grid(int n, double lo, double hi) {
  Eigen::VectorXd e(n);
  for (int i = 0; i < n; ++i) {
    e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return e;
}

SpectralParams spectral_sim_params() {
  SpectralParams p;
  p.alpha = 37.62;
  p.beta = 1.0;
  p.gamma = 40.0 / 37.62;  // alpha * gamma = 40 exactly
  p.mu = 250;
  p.phi = 0.2;
  return p;
}

Eigen::VectorXi simulate_spectral(const SpectralParams& params,
                                  const Eigen::VectorXd& energies, SeededRng& rng) {
  const int n = static_cast<int>(energies.size());
  Eigen::VectorXi x(n);
  for (int i = 0; i < n; ++i) {
    const double e = energies[i];
    const double line = (i + 1 == params.mu) ? params.gamma : 0.0;
    const double lambda =
        params.alpha * (std::pow(e, -params.beta) + line) * std::exp(-params.phi / e);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw InvalidParams("simulate_spectral: nonpositive intensity");
    }
    x[i] = static_cast<int>(rng.poisson(lambda));
  }
  return x;
}

SpectralModel::SpectralModel(Eigen::VectorXd energies, Eigen::VectorXi counts)
    : energies_(std::move(energies)), counts_(std::move(counts)) {
  if (energies_.size() != counts_.size() || energies_.size() < 2) {
    throw InvalidParams("spectral model: energies/counts mismatch");
  }
  if ((energies_.array() <= 0.0).any()) {
    throw InvalidParams("spectral model: energies must be positive");
  }
  if ((counts_.array() < 0).any()) {
    throw InvalidParams("spectral model: negative counts");
  }
  log_e_ = energies_.array().log();
  inv_e_ = energies_.array().inverse();
  counts_d_ = counts_.cast<double>().array();
  sum_x_ = counts_d_.sum();
  sum_x_log_e_ = (counts_d_ * log_e_).sum();
  sum_x_inv_e_ = (counts_d_ * inv_e_).sum();
}

ComponentState SpectralModel::initial_state() const {
  ComponentState s;
  s.set("alpha", 30.0);
  s.set("beta", 3.0);
  s.set("gamma", 1.0);
  s.set("mu", std::int64_t{10});
  s.set("phi", 0.5);
  s.set("XL", Eigen::VectorXi(Eigen::VectorXi::Zero(energies_.size())));
  return s;
}

SpectralParams SpectralModel::params_of(const ComponentState& state) const {
  SpectralParams p;
  p.alpha = state.scalar("alpha");
  p.beta = state.scalar("beta");
  p.gamma = state.scalar("gamma");
  p.mu = state.integer("mu");
  p.phi = state.scalar("phi");
  return p;
}

double SpectralModel::intensity_sum(const SpectralParams& p) const {
  const double base = ((-p.beta * log_e_) - p.phi * inv_e_).exp().sum();
  const int line = static_cast<int>(p.mu) - 1;
  return base + p.gamma * std::exp(-p.phi * inv_e_[line]);
}

double SpectralModel::log_joint(const SpectralParams& p) const {
  if (!(p.alpha > 0.0) || !(p.gamma > 0.0) || p.mu < 1 || p.mu > bins()) return kNegInf;
  const int line = static_cast<int>(p.mu) - 1;
  // sum_i X_i log g_i with the line folded in through log1p(gamma E_mu^beta).
  const double line_term =
      counts_d_[line] * softplus(p.beta * log_e_[line] + std::log(p.gamma));
  const double sum_x_log_g =
      -p.beta * sum_x_log_e_ - p.phi * sum_x_inv_e_ + line_term;
  return sum_x_ * std::log(p.alpha) + sum_x_log_g - p.alpha * intensity_sum(p);
}

double SpectralModel::log_joint_augmented(const SpectralParams& p,
                                          const Eigen::VectorXi& xl) const {
  if (!(p.alpha > 0.0) || !(p.gamma > 0.0) || p.mu < 1 || p.mu > bins()) return kNegInf;
  const int line = static_cast<int>(p.mu) - 1;
  double xl_line = 0.0;
  for (int i = 0; i < bins(); ++i) {
    if (xl[i] < 0 || xl[i] > counts_[i]) return kNegInf;
    if (xl[i] > 0 && i != line) return kNegInf;  // indicator kills the line term
    if (i == line) xl_line = static_cast<double>(xl[i]);
  }
  return sum_x_ * std::log(p.alpha) - p.phi * sum_x_inv_e_ -
         p.beta * (sum_x_log_e_ - xl_line * log_e_[line]) +
         xl_line * std::log(p.gamma) - p.alpha * intensity_sum(p);
}

double SpectralModel::log_alpha_marginal(const SpectralParams& p) const {
  if (!(p.gamma > 0.0) || p.mu < 1 || p.mu > bins()) return kNegInf;
  const int line = static_cast<int>(p.mu) - 1;
  const double line_term =
      counts_d_[line] * softplus(p.beta * log_e_[line] + std::log(p.gamma));
  const double sum_x_log_g =
      -p.beta * sum_x_log_e_ - p.phi * sum_x_inv_e_ + line_term;
  return sum_x_log_g - (sum_x_ + 1.0) * std::log(intensity_sum(p));
}

Eigen::VectorXi SpectralModel::draw_line_counts(const SpectralParams& p,
                                                SeededRng& rng) const {
  Eigen::VectorXi xl = Eigen::VectorXi::Zero(bins());
  const int line = static_cast<int>(p.mu) - 1;
  const double cont = std::exp(-p.beta * log_e_[line]);
  const double prob = p.gamma / (cont + p.gamma);
  xl[line] = static_cast<int>(rng.binomial(counts_[line], prob));
  return xl;
}

double SpectralModel::draw_alpha(const SpectralParams& p, SeededRng& rng) const {
  return rng.gamma(sum_x_ + 1.0, intensity_sum(p));
}

double SpectralModel::draw_gamma(const SpectralParams& p, const Eigen::VectorXi& xl,
                                 SeededRng& rng) const {
  const int line = static_cast<int>(p.mu) - 1;
  const double rate = p.alpha * std::exp(-p.phi * inv_e_[line]);
  return rng.gamma(static_cast<double>(xl[line]) + 1.0, rate);
}

double SpectralModel::log_alpha_conditional(const SpectralParams& p) const {
  if (!(p.alpha > 0.0)) return kNegInf;
  const double shape = sum_x_ + 1.0;
  const double rate = intensity_sum(p);
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(p.alpha) - rate * p.alpha;
}

void SpectralModel::draw_exact(const StepSets& sets, ComponentState& state,
                               SeededRng& rng) const {
  const SpectralParams p = params_of(state);
  if (sets.samples == make_set({"XL"})) {
    state.set("XL", draw_line_counts(p, rng));
    return;
  }
  if (sets.samples == make_set({"alpha"})) {
    // The Gamma form is the same whether or not XL is marginalized out:
    // alpha's conditional does not involve the line counts.
    state.set("alpha", draw_alpha(p, rng));
    return;
  }
  if (sets.samples == make_set({"alpha", "XL"})) {
    SpectralParams q = p;
    q.alpha = draw_alpha(p, rng);
    state.set("alpha", q.alpha);
    state.set("XL", draw_line_counts(q, rng));
    return;
  }
  if (sets.samples == make_set({"gamma"})) {
    if (!sets.marginalized_out.empty()) {
      throw MissingConditional("gamma's conditional requires the line counts");
    }
    state.set("gamma", draw_gamma(p, state.ivector("XL"), rng));
    return;
  }
  throw MissingConditional("spectral model: no exact draw for this partition");
}

double SpectralModel::log_target(const StepSets& sets, const ComponentState& state) const {
  const SpectralParams p = params_of(state);
  const IdSet marg_xl = make_set({"XL"});
  const IdSet marg_xl_alpha = make_set({"XL", "alpha"});
  if (sets.marginalized_out == marg_xl_alpha) {
    return log_alpha_marginal(p);
  }
  if (sets.marginalized_out == marg_xl) {
    return log_joint(p);
  }
  if (sets.marginalized_out.empty()) {
    return log_joint_augmented(p, state.ivector("XL"));
  }
  throw MissingConditional("spectral model: no target for this partition");
}

double SpectralModel::log_exact_conditional(const StepSets& sets,
                                            const ComponentState& state) const {
  if (sets.samples == make_set({"alpha"})) {
    return log_alpha_conditional(params_of(state));
  }
  throw MissingConditional("spectral model: no normalized conditional for this partition");
}

}  // namespace mhpcg
