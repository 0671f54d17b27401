#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <memory>

#include "mhpcg/rng.hpp"
#include "mhpcg/state.hpp"

namespace mhpcg {

/// A fully parameterized distribution from one of the families the model
/// conditionals need. Gamma and inverse-gamma are (shape, rate) and
/// (shape, scale) respectively; the Gamma rate multiplies the variate in the
/// exponent, matching the conditional draws in the spectral and calibration
/// posteriors.
struct DistSpec {
  enum class Family {
    Normal,           // a = mean, b = sd
    MVNormal2,        // mean (2), cov (2x2)
    MVNormalQ,        // mean (q), cov (q x q), factorization cached
    Gamma,            // a = shape, b = rate
    InvGamma,         // a = shape, b = scale
    Poisson,          // a = mean
    Binomial,         // n = count, b = success probability
    DiscreteUniform,  // n = support size, values {1..n}
    LogNormal,        // a = mean of log, b = sd of log
  };

  Family family = Family::Normal;
  double a = 0.0;
  double b = 1.0;
  std::int64_t n = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> chol;  // MVNormal only

  static DistSpec normal(double mean, double sd);
  static DistSpec mvnormal2(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov);
  static DistSpec mvnormal(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static DistSpec gamma(double shape, double rate);
  static DistSpec inv_gamma(double shape, double scale);
  static DistSpec poisson(double mean);
  static DistSpec binomial(std::int64_t count, double prob);
  static DistSpec discrete_uniform(std::int64_t n);
  static DistSpec log_normal(double mean_log, double sd_log);
};

/// One draw; the rng state advances deterministically. Throws InvalidParams
/// when the spec's invariants are violated.
Value draw(const DistSpec& spec, SeededRng& rng);

/// Natural-log density or mass at x, with no constant dropped. Returns
/// -infinity outside the support.
double log_pdf(const DistSpec& spec, const Value& x);

}  // namespace mhpcg
