#include "mhpcg/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mhpcg/errors.hpp"

namespace mhpcg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

void check_sd(double sd) {
  if (!(sd > 0.0) || !std::isfinite(sd)) throw InvalidParams("sd must be positive");
}

std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> factorize(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw InvalidParams("covariance must be square");
  if (!cov.isApprox(cov.transpose(), 1e-12)) {
    throw InvalidParams("covariance must be symmetric");
  }
  auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(cov);
  if (llt->info() != Eigen::Success) {
    throw InvalidParams("covariance is not positive definite");
  }
  return llt;
}

double mvn_log_pdf(const Eigen::VectorXd& mean,
                   const Eigen::LLT<Eigen::MatrixXd>& llt,
                   const Eigen::VectorXd& x) {
  const Eigen::Index d = mean.size();
  const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
  double log_det_l = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    log_det_l += std::log(llt.matrixL()(i, i));
  }
  return -0.5 * static_cast<double>(d) * kLogTwoPi - log_det_l - 0.5 * z.squaredNorm();
}

Eigen::VectorXd mvn_draw(const Eigen::VectorXd& mean,
                         const Eigen::LLT<Eigen::MatrixXd>& llt, SeededRng& rng) {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + llt.matrixL() * z;
}

}  // namespace

DistSpec DistSpec::normal(double mean, double sd) {
  check_sd(sd);
  DistSpec s;
  s.family = Family::Normal;
  s.a = mean;
  s.b = sd;
  return s;
}

DistSpec DistSpec::mvnormal2(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov) {
  DistSpec s = mvnormal(mean, cov);
  s.family = Family::MVNormal2;
  return s;
}

DistSpec DistSpec::mvnormal(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  DistSpec s;
  s.family = Family::MVNormalQ;
  s.chol = factorize(cov);
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  if (s.mean.size() != s.cov.rows()) throw InvalidParams("mean/cov size mismatch");
  return s;
}

DistSpec DistSpec::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw InvalidParams("gamma: shape and rate must be strictly positive");
  }
  DistSpec s;
  s.family = Family::Gamma;
  s.a = shape;
  s.b = rate;
  return s;
}

DistSpec DistSpec::inv_gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw InvalidParams("inv_gamma: shape and scale must be strictly positive");
  }
  DistSpec s;
  s.family = Family::InvGamma;
  s.a = shape;
  s.b = scale;
  return s;
}

DistSpec DistSpec::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw InvalidParams("poisson: mean must be finite and nonnegative");
  }
  DistSpec s;
  s.family = Family::Poisson;
  s.a = mean;
  return s;
}

DistSpec DistSpec::binomial(std::int64_t count, double prob) {
  if (count < 0) throw InvalidParams("binomial: count must be >= 0");
  if (!(prob >= 0.0) || !(prob <= 1.0)) throw InvalidParams("binomial: prob in [0,1]");
  DistSpec s;
  s.family = Family::Binomial;
  s.n = count;
  s.b = prob;
  return s;
}

DistSpec DistSpec::discrete_uniform(std::int64_t n) {
  if (n < 1) throw InvalidParams("discrete_uniform: support nonempty");
  DistSpec s;
  s.family = Family::DiscreteUniform;
  s.n = n;
  return s;
}

DistSpec DistSpec::log_normal(double mean_log, double sd_log) {
  check_sd(sd_log);
  DistSpec s;
  s.family = Family::LogNormal;
  s.a = mean_log;
  s.b = sd_log;
  return s;
}

Value draw(const DistSpec& spec, SeededRng& rng) {
  switch (spec.family) {
    case DistSpec::Family::Normal:
      return spec.a + spec.b * rng.normal();
    case DistSpec::Family::MVNormal2:
    case DistSpec::Family::MVNormalQ:
      return Eigen::VectorXd(mvn_draw(spec.mean, *spec.chol, rng));
    case DistSpec::Family::Gamma:
      return rng.gamma(spec.a, spec.b);
    case DistSpec::Family::InvGamma:
      return rng.inv_gamma(spec.a, spec.b);
    case DistSpec::Family::Poisson:
      return rng.poisson(spec.a);
    case DistSpec::Family::Binomial:
      return rng.binomial(spec.n, spec.b);
    case DistSpec::Family::DiscreteUniform:
      return rng.discrete_uniform(spec.n);
    case DistSpec::Family::LogNormal:
      return rng.log_normal(spec.a, spec.b);
  }
  throw InvalidParams("unknown family");
}

double log_pdf(const DistSpec& spec, const Value& x) {
  switch (spec.family) {
    case DistSpec::Family::Normal: {
      const double v = std::get<double>(x);
      const double z = (v - spec.a) / spec.b;
      return -0.5 * kLogTwoPi - std::log(spec.b) - 0.5 * z * z;
    }
    case DistSpec::Family::MVNormal2:
    case DistSpec::Family::MVNormalQ:
      return mvn_log_pdf(spec.mean, *spec.chol, std::get<Eigen::VectorXd>(x));
    case DistSpec::Family::Gamma: {
      const double v = std::get<double>(x);
      if (!(v > 0.0)) return kNegInf;
      return spec.a * std::log(spec.b) - std::lgamma(spec.a) +
             (spec.a - 1.0) * std::log(v) - spec.b * v;
    }
    case DistSpec::Family::InvGamma: {
      const double v = std::get<double>(x);
      if (!(v > 0.0)) return kNegInf;
      return spec.a * std::log(spec.b) - std::lgamma(spec.a) -
             (spec.a + 1.0) * std::log(v) - spec.b / v;
    }
    case DistSpec::Family::Poisson: {
      const std::int64_t k = std::get<std::int64_t>(x);
      if (k < 0) return kNegInf;
      if (spec.a == 0.0) return k == 0 ? 0.0 : kNegInf;
      const double kd = static_cast<double>(k);
      return kd * std::log(spec.a) - spec.a - std::lgamma(kd + 1.0);
    }
    case DistSpec::Family::Binomial: {
      const std::int64_t k = std::get<std::int64_t>(x);
      if (k < 0 || k > spec.n) return kNegInf;
      const double kd = static_cast<double>(k);
      const double nd = static_cast<double>(spec.n);
      const double lchoose =
          std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
      double lp = lchoose;
      if (spec.b == 0.0) return k == 0 ? 0.0 : kNegInf;
      if (spec.b == 1.0) return k == spec.n ? 0.0 : kNegInf;
      lp += kd * std::log(spec.b) + (nd - kd) * std::log1p(-spec.b);
      return lp;
    }
    case DistSpec::Family::DiscreteUniform: {
      const std::int64_t k = std::get<std::int64_t>(x);
      if (k < 1 || k > spec.n) return kNegInf;
      return -std::log(static_cast<double>(spec.n));
    }
    case DistSpec::Family::LogNormal: {
      const double v = std::get<double>(x);
      if (!(v > 0.0)) return kNegInf;
      const double z = (std::log(v) - spec.a) / spec.b;
      return -std::log(v) - std::log(spec.b) - 0.5 * kLogTwoPi - 0.5 * z * z;
    }
  }
  throw InvalidParams("unknown family");
}

}  // namespace mhpcg
