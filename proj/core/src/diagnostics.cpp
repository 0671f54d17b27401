#include "mhpcg/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "mhpcg/errors.hpp"

namespace mhpcg {

AcfResult acf(std::span<const double> series, int max_lag) {
  const int t = static_cast<int>(series.size());
  if (t <= max_lag) throw std::invalid_argument("acf: series shorter than max lag");
  const double m = mean(series);
  double c0 = 0.0;
  for (double v : series) c0 += (v - m) * (v - m);
  c0 /= static_cast<double>(t);
  if (c0 == 0.0) throw DegenerateSeries("acf of a constant series");
  AcfResult r;
  r.length = t;
  r.acf.resize(static_cast<std::size_t>(max_lag) + 1);
  r.acf[0] = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (int i = 0; i + k < t; ++i) ck += (series[i] - m) * (series[i + k] - m);
    ck /= static_cast<double>(t);
    r.acf[static_cast<std::size_t>(k)] = ck / c0;
  }
  return r;
}

double ess(std::span<const double> series) {
  const int t = static_cast<int>(series.size());
  if (t < 100) throw std::invalid_argument("ess: need at least 100 draws");
  const int max_lag = std::min(t - 2, 2000);
  const AcfResult r = acf(series, max_lag);
  // Geyer: accumulate rho over consecutive pairs while the pair sums stay
  // positive.
  double sum = 0.0;
  for (int k = 1; k + 1 <= max_lag; k += 2) {
    const double pair = r.at(k) + r.at(k + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = 1.0 + 2.0 * sum;
  return static_cast<double>(t) / std::max(tau, 1e-12);
}

const ComponentComparison& ComparisonReport::at(const std::string& component) const {
  for (const auto& c : components) {
    if (c.component == component) return c;
  }
  throw ComponentMissing("no comparison for component '" + component + "'");
}

double ComparisonReport::corr(char which, const std::string& c1, const std::string& c2) const {
  int i = -1, j = -1;
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (components[k].component == c1) i = static_cast<int>(k);
    if (components[k].component == c2) j = static_cast<int>(k);
  }
  if (i < 0 || j < 0) throw ComponentMissing("correlation components not found");
  return which == 'a' ? corr_a(i, j) : corr_b(i, j);
}

std::string ComparisonReport::to_json() const {
  nlohmann::json out;
  for (const auto& c : components) {
    nlohmann::json jc;
    jc["component"] = c.component;
    jc["mean_a"] = c.mean_a;
    jc["mean_b"] = c.mean_b;
    jc["var_a"] = c.var_a;
    jc["var_b"] = c.var_b;
    jc["ks_statistic"] = c.ks.statistic;
    jc["ks_p_value"] = c.ks.p_value;
    nlohmann::json qq = nlohmann::json::array();
    for (const auto& [qa, qb] : c.qq) qq.push_back({qa, qb});
    jc["qq"] = std::move(qq);
    out["components"].push_back(std::move(jc));
  }
  auto dump_matrix = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  out["corr_a"] = dump_matrix(corr_a);
  out["corr_b"] = dump_matrix(corr_b);
  return out.dump(2);
}

ComparisonReport compare_traces(const Trace& a, const Trace& b,
                                const std::vector<std::string>& components) {
  ComparisonReport report;
  const int k = static_cast<int>(components.size());
  std::vector<std::vector<double>> sa, sb;
  for (const auto& name : components) {
    if (!a.has_column(name) || !b.has_column(name)) {
      throw ComponentMissing("trace lacks component '" + name + "'");
    }
    sa.push_back(a.series(name));
    sb.push_back(b.series(name));
  }
  for (int i = 0; i < k; ++i) {
    ComponentComparison c;
    c.component = components[static_cast<std::size_t>(i)];
    c.mean_a = mean(sa[i]);
    c.mean_b = mean(sb[i]);
    c.var_a = variance(sa[i]);
    c.var_b = variance(sb[i]);
    c.ks = two_sample_ks(sa[i], sb[i]);
    for (int pct = 1; pct <= 99; ++pct) {
      const double p = static_cast<double>(pct) / 100.0;
      c.qq.emplace_back(quantile(sa[i], p), quantile(sb[i], p));
    }
    report.components.push_back(std::move(c));
  }
  report.corr_a = Eigen::MatrixXd::Identity(k, k);
  report.corr_b = Eigen::MatrixXd::Identity(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      report.corr_a(i, j) = report.corr_a(j, i) = correlation(sa[i], sa[j]);
      report.corr_b(i, j) = report.corr_b(j, i) = correlation(sb[i], sb[j]);
    }
  }
  return report;
}

ChooseLResult choose_l(const LogTargetFn& target, const JumpDescriptor& jump,
                       const ComponentState& start, const IdSet& samples,
                       int pilot_iterations, double threshold, int max_lag,
                       SeededRng& rng) {
  if (pilot_iterations < 1000) {
    throw std::invalid_argument("choose_l: pilot needs at least 1000 iterations");
  }
  if (samples.size() != 1) {
    throw std::invalid_argument("choose_l: diagnostic tracks one scalar component");
  }
  ComponentState state = start;
  std::vector<double> series(static_cast<std::size_t>(pilot_iterations));
  int accepted = 0;
  for (int i = 0; i < pilot_iterations; ++i) {
    const MhOutcome o = mh_update(target, jump, state, samples, rng);
    accepted += o.accepted ? 1 : 0;
    series[static_cast<std::size_t>(i)] = state.scalar(samples[0]);
  }
  ChooseLResult result;
  result.acceptance_rate = static_cast<double>(accepted) / pilot_iterations;
  result.pilot_acf = acf(series, std::min(max_lag, pilot_iterations - 1));
  for (int l = 1; l <= result.pilot_acf.max_lag(); ++l) {
    if (std::fabs(result.pilot_acf.at(l)) < threshold) {
      result.l_star = l;
      return result;
    }
  }
  throw LNotFound("no lag below threshold within max_lag");
}

Lemma1Result lemma1_check(const BivariateNormalModel& model, const JumpDescriptor& jump,
                          int replications, SeededRng& rng) {
  Lemma1Result res;
  double sum_ratio = 0.0, sum_sq_ratio = 0.0;
  double sum_log = 0.0, sum_sq_log = 0.0;
  const IdSet psi2{"psi2"};
  for (int i = 0; i < replications; ++i) {
    // Stationary pair and the fresh marginal draw both strategies share.
    ComponentState state;
    const double psi1_old = rng.normal();
    state.set("psi1", psi1_old);
    state.set("psi2", model.draw_conditional(psi1_old, rng));
    const double psi2_old = state.scalar("psi2");
    const double psi1_new = rng.normal();

    // Kernel route: both strategies consume the identical proposal stream.
    const SeededRng proposal_stream = rng;
    SeededRng rng_iter = proposal_stream;
    ComponentState s_iter = state;
    s_iter.set("psi1", psi1_new);
    StepSets cond_sets{psi2, {"psi1"}, {}};
    const MhOutcome iter_out = mh_update(
        [&](const ComponentState& s) { return model.log_target(cond_sets, s); },
        jump, s_iter, psi2, rng_iter);

    SeededRng rng_joint = proposal_stream;
    ComponentState s_joint = state;
    const MhOutcome joint_out = joint_mh_update(
        [&](ComponentState& s, SeededRng&) { s.set("psi1", psi1_new); },
        jump, [&](const ComponentState& s) { return model.log_target(cond_sets, s); },
        s_joint, {"psi1"}, psi2, rng_joint);

    // Advance the master stream exactly as one strategy did.
    rng = rng_iter;

    const double log_ratio_kernel = iter_out.log_r - joint_out.log_r;
    // Density route: the ratio collapses to p(psi2 | psi1_old) / p(psi2 | psi1_new).
    const double log_ratio_density =
        model.log_conditional(psi2_old, psi1_old) - model.log_conditional(psi2_old, psi1_new);
    res.max_identity_gap =
        std::max(res.max_identity_gap, std::fabs(log_ratio_kernel - log_ratio_density));

    const double ratio = std::exp(log_ratio_kernel);
    sum_ratio += ratio;
    sum_sq_ratio += ratio * ratio;
    sum_log += log_ratio_kernel;
    sum_sq_log += log_ratio_kernel * log_ratio_kernel;
  }
  const double n = static_cast<double>(replications);
  res.mean_ratio = sum_ratio / n;
  res.mean_log_ratio = sum_log / n;
  const double sd_ratio =
      std::sqrt(std::max(0.0, sum_sq_ratio / n - res.mean_ratio * res.mean_ratio));
  const double sd_log =
      std::sqrt(std::max(0.0, sum_sq_log / n - res.mean_log_ratio * res.mean_log_ratio));
  const double z99 = 2.5758293035489004;
  res.ci99_log_lo = res.mean_log_ratio - z99 * sd_log / std::sqrt(n);
  res.ci99_log_hi = res.mean_log_ratio + z99 * sd_log / std::sqrt(n);
  res.ci99_ratio_lo = res.mean_ratio - z99 * sd_ratio / std::sqrt(n);
  res.ci99_ratio_hi = res.mean_ratio + z99 * sd_ratio / std::sqrt(n);
  return res;
}

void write_acf_csv(const AcfResult& r, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::fputs("lag,acf\n", f);
  for (int k = 0; k <= r.max_lag(); ++k) {
    std::fprintf(f, "%d,%.17g\n", k, r.at(k));
  }
  std::fclose(f);
}

void write_qq_csv(const std::vector<std::pair<double, double>>& qq,
                  const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::fputs("qa,qb\n", f);
  for (const auto& [qa, qb] : qq) std::fprintf(f, "%.17g,%.17g\n", qa, qb);
  std::fclose(f);
}

}  // namespace mhpcg
