#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mhpcg/kernels.hpp"
#include "mhpcg/models/gaussian.hpp"
#include "mhpcg/stats.hpp"
#include "mhpcg/trace.hpp"

namespace mhpcg {

struct AcfResult {
  std::vector<double> acf;  // lags 0..max_lag; acf[0] == 1
  int length = 0;           // series length

  double at(int lag) const { return acf[static_cast<std::size_t>(lag)]; }
  int max_lag() const { return static_cast<int>(acf.size()) - 1; }
};

/// Standard biased autocovariance estimator normalized by lag zero.
AcfResult acf(std::span<const double> series, int max_lag);

/// Effective sample size T / (1 + 2 sum rho_k) with the Geyer
/// initial-positive-sequence truncation of the autocorrelation sum.
double ess(std::span<const double> series);

struct ComponentComparison {
  std::string component;
  double mean_a = 0, mean_b = 0;
  double var_a = 0, var_b = 0;
  KsResult ks;
  std::vector<std::pair<double, double>> qq;  // percentiles 1..99
};

struct ComparisonReport {
  std::vector<ComponentComparison> components;
  // Within-trace correlation matrices over the compared components.
  Eigen::MatrixXd corr_a;
  Eigen::MatrixXd corr_b;

  const ComponentComparison& at(const std::string& component) const;
  double corr(char which, const std::string& c1, const std::string& c2) const;
  std::string to_json() const;
};

/// Moments, correlations, QQ point pairs and two-sample KS per component
/// (flattened trace column names).
ComparisonReport compare_traces(const Trace& a, const Trace& b,
                                const std::vector<std::string>& components);

struct ChooseLResult {
  int l_star = 0;
  AcfResult pilot_acf;
  double acceptance_rate = 0.0;
};

/// Pilot MH run on a conditional target with the conditioning held fixed;
/// returns the smallest lag whose autocorrelation magnitude falls below the
/// threshold. Throws LNotFound past max_lag.
ChooseLResult choose_l(const LogTargetFn& target, const JumpDescriptor& jump,
                       const ComponentState& start, const IdSet& samples,
                       int pilot_iterations, double threshold, int max_lag,
                       SeededRng& rng);

struct Lemma1Result {
  double mean_ratio = 0.0;
  double mean_log_ratio = 0.0;
  double ci99_log_lo = 0.0, ci99_log_hi = 0.0;
  double ci99_ratio_lo = 0.0, ci99_ratio_hi = 0.0;
  double max_identity_gap = 0.0;  // kernel-route vs density-route agreement
};

/// Monte Carlo check of the acceptance-ratio inequality between the iterated
/// and joint strategies on the bivariate normal target: stationary pairs,
/// an independent fresh first component, and one shared proposal stream for
/// both strategies. The ratio is also recomputed from the conditional-density
/// form as an independent code path.
Lemma1Result lemma1_check(const BivariateNormalModel& model, const JumpDescriptor& jump,
                          int replications, SeededRng& rng);

/// Plot-ready CSV (lag, acf) and (qa, qb) point sets.
void write_acf_csv(const AcfResult& r, const std::filesystem::path& path);
void write_qq_csv(const std::vector<std::pair<double, double>>& qq,
                  const std::filesystem::path& path);

}  // namespace mhpcg
