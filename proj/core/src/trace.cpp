#include "mhpcg/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mhpcg/errors.hpp"

namespace mhpcg {

using nlohmann::json;

double StepAcceptanceLog::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  const double n = static_cast<double>(accepted.size());
  return std::accumulate(accepted.begin(), accepted.end(), 0.0) / n;
}

double StepAcceptanceLog::update_rate() const { return acceptance_rate(); }

Trace::Trace(const std::vector<ComponentId>& recorded, const ComponentState& prototype)
    : recorded_(recorded) {
  for (const auto& id : recorded_) {
    const Value& v = prototype.get(id);
    spans_.emplace_back(columns_.size(), value_size(v));
    for (auto& label : flat_labels(id, v)) columns_.push_back(std::move(label));
  }
}

void Trace::add_row(const ComponentState& state) {
  const std::size_t w = columns_.size();
  data_.resize(data_.size() + w);
  double* row = data_.data() + static_cast<std::size_t>(rows_) * w;
  for (std::size_t i = 0; i < recorded_.size(); ++i) {
    flatten_value(state.get(recorded_[i]), row + spans_[i].first);
  }
  ++rows_;
}

int Trace::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> Trace::series(const std::string& column) const {
  const int c = column_index(column);
  if (c < 0) throw ComponentMissing("trace has no column '" + column + "'");
  std::vector<double> out(static_cast<std::size_t>(rows_));
  for (int r = 0; r < rows_; ++r) out[static_cast<std::size_t>(r)] = at(r, c);
  return out;
}

void Trace::write_csv(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    std::fputs(columns_[i].c_str(), f);
    std::fputc(i + 1 == columns_.size() ? '\n' : ',', f);
  }
  const std::size_t w = columns_.size();
  for (int r = 0; r < rows_; ++r) {
    const double* row = data_.data() + static_cast<std::size_t>(r) * w;
    for (std::size_t c = 0; c < w; ++c) {
      std::fprintf(f, "%.17g", row[c]);
      std::fputc(c + 1 == w ? '\n' : ',', f);
    }
  }
  std::fclose(f);
}

Trace Trace::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Trace t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) t.columns_.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::size_t c = 0;
    while (std::getline(row, cell, ',')) {
      t.data_.push_back(std::stod(cell));
      ++c;
    }
    if (c != t.columns_.size()) throw std::runtime_error("ragged trace row");
    ++t.rows_;
  }
  return t;
}

void Trace::write_sidecar_json(const std::filesystem::path& path) const {
  json out;
  out["meta"] = {
      {"sampler", meta.sampler}, {"model", meta.model},
      {"seed", meta.seed},       {"stream", meta.stream},
      {"burnin", meta.burnin},   {"iterations", meta.iterations},
      {"wall_time_s", meta.wall_time_s},
  };
  json steps = json::array();
  for (const auto& log : acceptance) {
    json s;
    s["step"] = log.step_index;
    s["samples"] = log.samples;
    s["acceptance_rate"] = log.acceptance_rate();
    s["accepted"] = log.accepted;
    s["log_r"] = log.log_r;
    s["inner_accepts"] = log.inner_accepts;
    s["proposals"] = log.proposals;
    steps.push_back(std::move(s));
  }
  out["acceptance"] = std::move(steps);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << out.dump(2) << '\n';
}

}  // namespace mhpcg
