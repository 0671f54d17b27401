#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mhpcg/state.hpp"

namespace mhpcg {

struct TraceMeta {
  std::string sampler;
  std::string model;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int burnin = 0;
  int iterations = 0;  // post-burnin draws recorded
  double wall_time_s = 0.0;
};

/// Per-MH-step acceptance log: one entry per post-burnin execution of the
/// step, so each vector has exactly `iterations` entries.
struct StepAcceptanceLog {
  int step_index = 0;  // 1-based position in the sweep
  IdSet samples;
  std::vector<std::uint8_t> accepted;
  std::vector<double> log_r;
  std::vector<int> inner_accepts;
  std::vector<std::vector<double>> proposals;  // flattened proposed values

  double acceptance_rate() const;
  /// Fraction of iterations in which the sampled set actually changed; for
  /// plain MH this equals the acceptance rate.
  double update_rate() const;
};

/// Post-burnin record of component states plus the acceptance log. Immutable
/// once a run completes; safe to share read-only across threads.
class Trace {
 public:
  Trace() = default;
  /// Layout from the prototype state; `recorded` lists component ids in
  /// column order.
  Trace(const std::vector<ComponentId>& recorded, const ComponentState& prototype);

  void add_row(const ComponentState& state);

  int rows() const { return rows_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<ComponentId>& recorded() const { return recorded_; }

  double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * columns_.size() + col]; }
  int column_index(const std::string& name) const;  // -1 if absent
  bool has_column(const std::string& name) const { return column_index(name) >= 0; }

  /// Series of one flattened column.
  std::vector<double> series(const std::string& column) const;

  TraceMeta meta;
  std::vector<StepAcceptanceLog> acceptance;

  /// One row per iteration, one column per scalar component (vectors
  /// flattened), decimal values with 17 significant digits.
  void write_csv(const std::filesystem::path& path) const;
  static Trace read_csv(const std::filesystem::path& path);

  /// Acceptance log and meta as a JSON sidecar.
  void write_sidecar_json(const std::filesystem::path& path) const;

 private:
  std::vector<ComponentId> recorded_;
  std::vector<std::string> columns_;
  std::vector<std::pair<std::size_t, std::size_t>> spans_;  // per recorded id: offset,len
  std::vector<double> data_;
  int rows_ = 0;
};

}  // namespace mhpcg
