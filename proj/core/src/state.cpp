#include "mhpcg/state.hpp"

#include <stdexcept>

#include "mhpcg/errors.hpp"

namespace mhpcg {

std::size_t value_size(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::int64_t>) {
          return 1;
        } else {
          return static_cast<std::size_t>(x.size());
        }
      },
      v);
}

std::size_t flatten_value(const Value& v, double* out) {
  return std::visit(
      [out](const auto& x) -> std::size_t {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          out[0] = x;
          return 1;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          out[0] = static_cast<double>(x);
          return 1;
        } else {
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            out[i] = static_cast<double>(*(x.data() + i));
          }
          return static_cast<std::size_t>(x.size());
        }
      },
      v);
}

bool value_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  const std::size_t n = value_size(a);
  if (n != value_size(b)) return false;
  std::vector<double> fa(n), fb(n);
  flatten_value(a, fa.data());
  flatten_value(b, fb.data());
  for (std::size_t i = 0; i < n; ++i) {
    // Bitwise comparison; NaN != NaN is fine here, states never hold NaN.
    if (fa[i] != fb[i]) return false;
  }
  return true;
}

const Value& ComponentState::get(const ComponentId& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw ComponentMissing("unknown component '" + id + "'");
  }
  return it->second;
}

void ComponentState::set(const ComponentId& id, Value v) {
  entries_[id] = std::move(v);
}

double ComponentState::scalar(const ComponentId& id) const {
  const Value& v = get(id);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw std::runtime_error("component '" + id + "' is not scalar");
}

std::int64_t ComponentState::integer(const ComponentId& id) const {
  const Value& v = get(id);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw std::runtime_error("component '" + id + "' is not an integer");
}

const Eigen::VectorXd& ComponentState::vector(const ComponentId& id) const {
  const Value& v = get(id);
  if (const auto* x = std::get_if<Eigen::VectorXd>(&v)) return *x;
  throw std::runtime_error("component '" + id + "' is not a real vector");
}

const Eigen::VectorXi& ComponentState::ivector(const ComponentId& id) const {
  const Value& v = get(id);
  if (const auto* x = std::get_if<Eigen::VectorXi>(&v)) return *x;
  throw std::runtime_error("component '" + id + "' is not an integer vector");
}

const Eigen::MatrixXd& ComponentState::matrix(const ComponentId& id) const {
  const Value& v = get(id);
  if (const auto* x = std::get_if<Eigen::MatrixXd>(&v)) return *x;
  throw std::runtime_error("component '" + id + "' is not a matrix");
}

std::vector<std::string> flat_labels(const ComponentId& id, const Value& v) {
  std::vector<std::string> labels;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::int64_t>) {
          labels.push_back(id);
        } else if constexpr (std::is_same_v<T, Eigen::MatrixXd>) {
          for (Eigen::Index j = 0; j < x.cols(); ++j) {
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
              labels.push_back(id + "[" + std::to_string(i + 1) + "," +
                               std::to_string(j + 1) + "]");
            }
          }
        } else {
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            labels.push_back(id + "[" + std::to_string(i + 1) + "]");
          }
        }
      },
      v);
  return labels;
}

}  // namespace mhpcg
