#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace mhpcg {

using ComponentId = std::string;
using IdSet = std::vector<ComponentId>;  // kept sorted and unique

/// One component's value: real scalar, integer scalar, real/integer vector,
/// or real matrix (factor scores and loadings).
using Value = std::variant<double, std::int64_t, Eigen::VectorXd,
                           Eigen::VectorXi, Eigen::MatrixXd>;

/// Number of scalar slots a value flattens to.
std::size_t value_size(const Value& v);

/// Flatten into `out` (column-major for matrices); returns slots written.
std::size_t flatten_value(const Value& v, double* out);

/// True when every scalar slot is bit-identical.
bool value_equal(const Value& a, const Value& b);

/// One full point in the target's support: a named map from component ids to
/// values. Ids are unique by construction of std::map.
class ComponentState {
 public:
  bool has(const ComponentId& id) const { return entries_.count(id) != 0; }

  const Value& get(const ComponentId& id) const;
  void set(const ComponentId& id, Value v);

  double scalar(const ComponentId& id) const;
  std::int64_t integer(const ComponentId& id) const;
  const Eigen::VectorXd& vector(const ComponentId& id) const;
  const Eigen::VectorXi& ivector(const ComponentId& id) const;
  const Eigen::MatrixXd& matrix(const ComponentId& id) const;

  const std::map<ComponentId, Value>& entries() const { return entries_; }

 private:
  std::map<ComponentId, Value> entries_;
};

/// Flattened column labels for a component, e.g. "XL[17]" or "Z[3,1]".
std::vector<std::string> flat_labels(const ComponentId& id, const Value& v);

}  // namespace mhpcg
