#include "mhpcg/models/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "mhpcg/errors.hpp"

namespace mhpcg {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);
}  // namespace

Eigen::VectorXd calibration_energy_grid() {
  Eigen::VectorXd e(1078);
  for (int j = 0; j < 1078; ++j) e[j] = 0.225 + 0.01 * static_cast<double>(j);
  return e;
}

PcaBasis synthesize_pca_basis(const Eigen::VectorXd& energies, int q, SeededRng& rng) {
  const int n = static_cast<int>(energies.size());
  if (q >= n || q < 1) throw InvalidParams("synthesize_pca_basis: need 1 <= q < n");
  PcaBasis basis;

  // Baseline: a broad log-normal bump in energy, the usual effective-area
  // shape, with a floor keeping it well away from zero.
  basis.a0.resize(n);
  for (int j = 0; j < n; ++j) {
    const double u = (std::log(energies[j]) - std::log(1.5)) / 0.8;
    basis.a0[j] = 100.0 * std::exp(-0.5 * u * u) + 20.0;
  }

  // Smooth sinusoidal perturbations with random phases, shaped by the
  // baseline, then Gram-Schmidt orthogonalized.
  Eigen::MatrixXd raw(n, q);
  for (int k = 0; k < q; ++k) {
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    for (int j = 0; j < n; ++j) {
      const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      raw(j, k) = std::sin((k + 1) * std::numbers::pi * t + phase) * basis.a0[j];
    }
  }
  basis.q.resize(n, q);
  for (int k = 0; k < q; ++k) {
    Eigen::VectorXd col = raw.col(k);
    for (int m = 0; m < k; ++m) {
      const Eigen::VectorXd& prev = basis.q.col(m);
      col -= (prev.dot(col) / prev.squaredNorm()) * prev;
    }
    // Mimic decaying principal-component scales.
    col *= 0.12 / static_cast<double>(k + 1) / col.cwiseAbs().maxCoeff();
    basis.q.col(k) = col.cwiseProduct(basis.a0);
  }
  // Re-orthogonalize after the envelope scaling.
  for (int k = 0; k < q; ++k) {
    Eigen::VectorXd col = basis.q.col(k);
    for (int m = 0; m < k; ++m) {
      const Eigen::VectorXd& prev = basis.q.col(m);
      col -= (prev.dot(col) / prev.squaredNorm()) * prev;
    }
    basis.q.col(k) = col;
  }

  // Guarantee positivity with margin: sum_k 4 |Q_jk| <= 0.85 A0_j for all j.
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const double m = 4.0 * basis.q.row(j).cwiseAbs().sum() / (0.85 * basis.a0[j]);
    worst = std::max(worst, m);
  }
  if (worst > 1.0) basis.q /= worst;
  return basis;
}

void write_pca_basis_csv(const PcaBasis& basis, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::fputs("A0", f);
  for (int k = 0; k < basis.q.cols(); ++k) std::fprintf(f, ",Q%d", k + 1);
  std::fputc('\n', f);
  for (int j = 0; j < basis.a0.size(); ++j) {
    std::fprintf(f, "%.17g", basis.a0[j]);
    for (int k = 0; k < basis.q.cols(); ++k) std::fprintf(f, ",%.17g", basis.q(j, k));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

PcaBasis read_pca_basis_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty basis file");
  int q = -1;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) ++q;
  }
  std::vector<double> a0;
  std::vector<double> qdata;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    a0.push_back(std::stod(cell));
    for (int k = 0; k < q; ++k) {
      std::getline(row, cell, ',');
      qdata.push_back(std::stod(cell));
    }
  }
  PcaBasis basis;
  const int n = static_cast<int>(a0.size());
  basis.a0 = Eigen::Map<Eigen::VectorXd>(a0.data(), n);
  basis.q.resize(n, q);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < q; ++k) basis.q(j, k) = qdata[static_cast<std::size_t>(j) * q + k];
  }
  return basis;
}

Eigen::VectorXi simulate_calibration(const PcaBasis& basis, const Eigen::VectorXd& energies,
                                     const Eigen::VectorXd& z, double alpha, double beta,
                                     SeededRng& rng) {
  const Eigen::VectorXd area = basis.a0 + basis.q * z;
  const int n = static_cast<int>(energies.size());
  Eigen::VectorXi y(n);
  for (int j = 0; j < n; ++j) {
    const double lambda = area[j] * alpha * std::pow(energies[j], -beta);
    if (!(lambda > 0.0)) throw InvalidParams("simulate_calibration: nonpositive intensity");
    y[j] = static_cast<int>(rng.poisson(lambda));
  }
  return y;
}

CalibrationModel::CalibrationModel(Eigen::VectorXd energies, Eigen::VectorXi counts,
                                   PcaBasis basis)
    : energies_(std::move(energies)), counts_(std::move(counts)), basis_(std::move(basis)) {
  if (energies_.size() != counts_.size() || basis_.a0.size() != energies_.size()) {
    throw InvalidParams("calibration model: size mismatch");
  }
  log_e_ = energies_.array().log();
  counts_d_ = counts_.cast<double>().array();
  sum_y_ = counts_d_.sum();
  sum_y_log_e_ = (counts_d_ * log_e_).sum();
}

ComponentState CalibrationModel::initial_state() const {
  ComponentState s;
  s.set("Z", Eigen::VectorXd(Eigen::VectorXd::Zero(basis_.q.cols())));
  s.set("alpha", 1.0);
  s.set("beta", 1.0);
  return s;
}

Eigen::VectorXd CalibrationModel::effective_area(const Eigen::VectorXd& z) const {
  return basis_.a0 + basis_.q * z;
}

double CalibrationModel::weighted_intensity(const Eigen::VectorXd& area, double beta) const {
  return (area.array() * (-beta * log_e_).exp()).sum();
}

double CalibrationModel::log_joint_given_z(const Eigen::VectorXd& z, double alpha,
                                           double beta) const {
  if (!(alpha > 0.0)) return kNegInf;
  const Eigen::VectorXd area = effective_area(z);
  if ((area.array() <= 0.0).any()) return kNegInf;  // positivity violation
  const double sum_y_log_a = (counts_d_ * area.array().log()).sum();
  return sum_y_log_a + sum_y_ * std::log(alpha) - beta * sum_y_log_e_ -
         alpha * weighted_intensity(area, beta);
}

double CalibrationModel::log_beta_marginal(const Eigen::VectorXd& z, double beta) const {
  const Eigen::VectorXd area = effective_area(z);
  if ((area.array() <= 0.0).any()) return kNegInf;
  const double sum_y_log_a = (counts_d_ * area.array().log()).sum();
  return sum_y_log_a - beta * sum_y_log_e_ -
         (sum_y_ + 1.0) * std::log(weighted_intensity(area, beta));
}

double CalibrationModel::draw_alpha(const Eigen::VectorXd& z, double beta,
                                    SeededRng& rng) const {
  const Eigen::VectorXd area = effective_area(z);
  if ((area.array() <= 0.0).any()) {
    throw NonFiniteDensity("effective area not positive at the current Z");
  }
  return rng.gamma(sum_y_ + 1.0, weighted_intensity(area, beta));
}

void CalibrationModel::draw_exact(const StepSets& sets, ComponentState& state,
                                  SeededRng& rng) const {
  if (sets.samples == make_set({"Z"})) {
    if (sets.marginalized_out != make_set({"alpha", "beta"})) {
      throw MissingConditional("Z is only drawable from its prior marginal");
    }
    Eigen::VectorXd z(basis_.q.cols());
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
    state.set("Z", std::move(z));
    return;
  }
  if (sets.samples == make_set({"alpha"})) {
    state.set("alpha", draw_alpha(state.vector("Z"), state.scalar("beta"), rng));
    return;
  }
  throw MissingConditional("calibration model: no exact draw for this partition");
}

double CalibrationModel::log_target(const StepSets& sets, const ComponentState& state) const {
  if (sets.samples == make_set({"beta"}) || sets.samples == make_set({"alpha", "beta"})) {
    if (set_contains(sets.marginalized_out, "alpha")) {
      return log_beta_marginal(state.vector("Z"), state.scalar("beta"));
    }
    return log_joint_given_z(state.vector("Z"), state.scalar("alpha"), state.scalar("beta"));
  }
  throw MissingConditional("calibration model: no target for this partition");
}

double CalibrationModel::log_exact_conditional(const StepSets& sets,
                                               const ComponentState& state) const {
  if (sets.samples == make_set({"alpha"})) {
    const double alpha = state.scalar("alpha");
    if (!(alpha > 0.0)) return kNegInf;
    const Eigen::VectorXd area = effective_area(state.vector("Z"));
    if ((area.array() <= 0.0).any()) return kNegInf;
    const double shape = sum_y_ + 1.0;
    const double rate = weighted_intensity(area, state.scalar("beta"));
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(alpha) -
           rate * alpha;
  }
  if (sets.samples == make_set({"Z"})) {
    const Eigen::VectorXd& z = state.vector("Z");
    return -0.5 * static_cast<double>(z.size()) * kLogTwoPi - 0.5 * z.squaredNorm();
  }
  throw MissingConditional("calibration model: no normalized conditional here");
}

}  // namespace mhpcg
