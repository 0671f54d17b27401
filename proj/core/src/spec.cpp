#include "mhpcg/spec.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace mhpcg {

using nlohmann::json;

IdSet make_set(std::initializer_list<ComponentId> ids) {
  IdSet s(ids);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

IdSet set_union(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IdSet set_minus(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IdSet set_intersect(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool set_contains(const IdSet& a, const ComponentId& id) {
  return std::binary_search(a.begin(), a.end(), id);
}

bool set_subset(const IdSet& small, const IdSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

void set_insert(IdSet& s, const ComponentId& id) {
  auto it = std::lower_bound(s.begin(), s.end(), id);
  if (it == s.end() || *it != id) s.insert(it, id);
}

JumpDescriptor JumpDescriptor::normal_walk(double scale, std::optional<double> tune) {
  JumpDescriptor j;
  j.kind = Kind::SymmetricNormalWalk;
  j.scale = Eigen::VectorXd::Constant(1, scale);
  j.tune_target = tune;
  return j;
}

JumpDescriptor JumpDescriptor::log_normal_walk(double scale, std::optional<double> tune) {
  JumpDescriptor j;
  j.kind = Kind::LogNormalWalk;
  j.scale = Eigen::VectorXd::Constant(1, scale);
  j.tune_target = tune;
  return j;
}

JumpDescriptor JumpDescriptor::discrete_uniform(std::int64_t support) {
  JumpDescriptor j;
  j.kind = Kind::DiscreteUniformIndependent;
  j.support = support;
  return j;
}

JumpDescriptor JumpDescriptor::mvnormal_walk(Eigen::MatrixXd cov, std::optional<double> tune) {
  JumpDescriptor j;
  j.kind = Kind::IndependentMVNormal;
  j.covariance = std::move(cov);
  j.tune_target = tune;
  return j;
}

JumpDescriptor JumpDescriptor::concat_marginal(IdSet exact_set, JumpDescriptor inner,
                                               IdSet exact_conditions) {
  JumpDescriptor j;
  j.kind = Kind::ConcatMarginalDraw;
  j.exact_set = std::move(exact_set);
  j.exact_conditions = std::move(exact_conditions);
  j.inner = std::make_shared<JumpDescriptor>(std::move(inner));
  return j;
}

JumpDescriptor JumpDescriptor::concat_conditional(IdSet exact_set, JumpDescriptor inner) {
  JumpDescriptor j;
  j.kind = Kind::ConcatConditionalDraw;
  j.exact_set = std::move(exact_set);
  j.inner = std::make_shared<JumpDescriptor>(std::move(inner));
  return j;
}

bool JumpDescriptor::is_walk() const {
  switch (kind) {
    case Kind::SymmetricNormalWalk:
    case Kind::LogNormalWalk:
    case Kind::IndependentMVNormal:
      return true;
    case Kind::ConcatMarginalDraw:
    case Kind::ConcatConditionalDraw:
      return inner && inner->is_walk();
    default:
      return false;
  }
}

IdSet StepSpec::kernel_dependencies() const {
  IdSet deps = conditions_on;
  if (kind == Kind::MH || kind == Kind::IteratedMH) {
    deps = set_union(deps, samples);
  } else if (kind == Kind::StarKernel) {
    deps = set_union(deps, set_minus(samples, star_trailing));
  }
  if (jump) deps = set_union(deps, jump->depends_on);
  return deps;
}

IdSet SamplerSpec::component_set() const {
  IdSet s(components.begin(), components.end());
  std::sort(s.begin(), s.end());
  return s;
}

void SamplerSpec::check_structure() const {
  const IdSet all = component_set();
  if (all.size() != components.size()) {
    throw std::invalid_argument(name + ": duplicate component ids");
  }
  IdSet sampled_somewhere;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const StepSpec& st = steps[i];
    const std::string where = name + " step " + std::to_string(i + 1);
    if (st.samples.empty()) throw std::invalid_argument(where + ": empty samples set");
    if (!set_intersect(st.samples, st.conditions_on).empty() ||
        !set_intersect(st.samples, st.marginalized_out).empty() ||
        !set_intersect(st.conditions_on, st.marginalized_out).empty()) {
      throw std::invalid_argument(where + ": samples/conditions/marginalized overlap");
    }
    const IdSet covered =
        set_union(set_union(st.samples, st.conditions_on), st.marginalized_out);
    if (covered != all) {
      throw std::invalid_argument(where + ": sets do not partition the component list");
    }
    if (st.is_mh_family() && !st.jump) {
      throw std::invalid_argument(where + ": MH-family step needs a jumping rule");
    }
    if (st.kind == StepSpec::Kind::IteratedMH && st.iterations < 1) {
      throw std::invalid_argument(where + ": IteratedMH needs L >= 1");
    }
    if (st.kind == StepSpec::Kind::StarKernel &&
        (!set_subset(st.star_trailing, st.samples) || st.star_trailing.empty())) {
      throw std::invalid_argument(where + ": star trailing set must be a nonempty "
                                          "subset of the sampled set");
    }
    if (st.jump && st.jump->kind == JumpDescriptor::Kind::ConcatMarginalDraw) {
      if (!set_subset(st.jump->exact_set, st.samples)) {
        throw std::invalid_argument(where + ": concatenated exact set not sampled");
      }
    }
    sampled_somewhere = set_union(sampled_somewhere, st.samples);
  }
  // A component no step samples is a fixed datum and belongs in the model.
  if (sampled_somewhere != all) {
    throw std::invalid_argument(name + ": components never sampled: " +
                                [&] {
                                  std::string s;
                                  for (const auto& c : set_minus(all, sampled_somewhere)) {
                                    s += c + " ";
                                  }
                                  return s;
                                }());
  }
}

namespace {

json jump_to_json(const JumpDescriptor& j) {
  json out;
  switch (j.kind) {
    case JumpDescriptor::Kind::SymmetricNormalWalk: out["kind"] = "normal_walk"; break;
    case JumpDescriptor::Kind::LogNormalWalk: out["kind"] = "lognormal_walk"; break;
    case JumpDescriptor::Kind::DiscreteUniformIndependent:
      out["kind"] = "discrete_uniform";
      break;
    case JumpDescriptor::Kind::IndependentMVNormal: out["kind"] = "mvnormal_walk"; break;
    case JumpDescriptor::Kind::ConcatMarginalDraw: out["kind"] = "concat_marginal"; break;
    case JumpDescriptor::Kind::ConcatConditionalDraw:
      out["kind"] = "concat_conditional";
      break;
  }
  if (j.scale.size() > 0) {
    out["scale"] = std::vector<double>(j.scale.data(), j.scale.data() + j.scale.size());
  }
  if (j.covariance.size() > 0) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < j.covariance.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < j.covariance.cols(); ++c) row.push_back(j.covariance(r, c));
      rows.push_back(row);
    }
    out["covariance"] = rows;
  }
  if (j.support > 0) out["support"] = j.support;
  if (!j.exact_set.empty()) out["exact_set"] = j.exact_set;
  if (!j.exact_conditions.empty()) out["exact_conditions"] = j.exact_conditions;
  if (j.inner) out["inner"] = jump_to_json(*j.inner);
  out["depends_on"] = j.depends_on;
  if (j.tune_target) out["tune_target"] = *j.tune_target;
  return out;
}

JumpDescriptor jump_from_json(const json& in) {
  JumpDescriptor j;
  const std::string kind = in.at("kind").get<std::string>();
  if (kind == "normal_walk") j.kind = JumpDescriptor::Kind::SymmetricNormalWalk;
  else if (kind == "lognormal_walk") j.kind = JumpDescriptor::Kind::LogNormalWalk;
  else if (kind == "discrete_uniform") j.kind = JumpDescriptor::Kind::DiscreteUniformIndependent;
  else if (kind == "mvnormal_walk") j.kind = JumpDescriptor::Kind::IndependentMVNormal;
  else if (kind == "concat_marginal") j.kind = JumpDescriptor::Kind::ConcatMarginalDraw;
  else if (kind == "concat_conditional") j.kind = JumpDescriptor::Kind::ConcatConditionalDraw;
  else throw std::invalid_argument("unknown jump kind '" + kind + "'");
  if (in.contains("scale")) {
    const auto v = in["scale"].get<std::vector<double>>();
    j.scale = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (in.contains("covariance")) {
    const auto rows = in["covariance"];
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    j.covariance.resize(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index k = 0; k < c; ++k) j.covariance(i, k) = rows[i][k].get<double>();
  }
  if (in.contains("support")) j.support = in["support"].get<std::int64_t>();
  if (in.contains("exact_set")) j.exact_set = in["exact_set"].get<IdSet>();
  if (in.contains("exact_conditions")) j.exact_conditions = in["exact_conditions"].get<IdSet>();
  if (in.contains("inner")) j.inner = std::make_shared<JumpDescriptor>(jump_from_json(in["inner"]));
  if (in.contains("depends_on")) j.depends_on = in["depends_on"].get<IdSet>();
  if (in.contains("tune_target")) j.tune_target = in["tune_target"].get<double>();
  std::sort(j.exact_set.begin(), j.exact_set.end());
  std::sort(j.exact_conditions.begin(), j.exact_conditions.end());
  std::sort(j.depends_on.begin(), j.depends_on.end());
  return j;
}

std::string kind_name(StepSpec::Kind k) {
  switch (k) {
    case StepSpec::Kind::DirectDraw: return "direct";
    case StepSpec::Kind::MH: return "mh";
    case StepSpec::Kind::StarKernel: return "star";
    case StepSpec::Kind::IteratedMH: return "iterated_mh";
  }
  return "?";
}

}  // namespace

std::string sampler_spec_to_json(const SamplerSpec& spec) {
  json out;
  out["name"] = spec.name;
  out["model"] = spec.model_ref;
  out["components"] = spec.components;
  json steps = json::array();
  for (const auto& st : spec.steps) {
    json s;
    s["kind"] = kind_name(st.kind);
    s["samples"] = st.samples;
    s["conditions_on"] = st.conditions_on;
    s["marginalized_out"] = st.marginalized_out;
    if (st.kind == StepSpec::Kind::IteratedMH) s["L"] = st.iterations;
    if (!st.star_trailing.empty()) s["star_trailing"] = st.star_trailing;
    if (st.jump) s["jump"] = jump_to_json(*st.jump);
    steps.push_back(s);
  }
  out["steps"] = steps;
  return out.dump(2);
}

SamplerSpec sampler_spec_from_json(const std::string& json_text) {
  const json in = json::parse(json_text);
  SamplerSpec spec;
  spec.name = in.at("name").get<std::string>();
  spec.model_ref = in.value("model", std::string{});
  spec.components = in.at("components").get<std::vector<ComponentId>>();
  for (const auto& s : in.at("steps")) {
    StepSpec st;
    const std::string kind = s.at("kind").get<std::string>();
    if (kind == "direct") st.kind = StepSpec::Kind::DirectDraw;
    else if (kind == "mh") st.kind = StepSpec::Kind::MH;
    else if (kind == "star") st.kind = StepSpec::Kind::StarKernel;
    else if (kind == "iterated_mh") st.kind = StepSpec::Kind::IteratedMH;
    else throw std::invalid_argument("unknown step kind '" + kind + "'");
    st.samples = s.at("samples").get<IdSet>();
    st.conditions_on = s.value("conditions_on", IdSet{});
    st.marginalized_out = s.value("marginalized_out", IdSet{});
    if (s.contains("L")) st.iterations = s["L"].get<int>();
    if (s.contains("star_trailing")) st.star_trailing = s["star_trailing"].get<IdSet>();
    if (s.contains("jump")) st.jump = jump_from_json(s["jump"]);
    std::sort(st.samples.begin(), st.samples.end());
    std::sort(st.conditions_on.begin(), st.conditions_on.end());
    std::sort(st.marginalized_out.begin(), st.marginalized_out.end());
    std::sort(st.star_trailing.begin(), st.star_trailing.end());
    spec.steps.push_back(std::move(st));
  }
  spec.check_structure();
  return spec;
}

}  // namespace mhpcg
