#include "mhpcg/models/registry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mhpcg/models/factor.hpp"

namespace mhpcg {

namespace {

IdSet sorted(IdSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

StepSpec direct(IdSet samples, IdSet conditions, IdSet marginalized = {}) {
  StepSpec st;
  st.kind = StepSpec::Kind::DirectDraw;
  st.samples = sorted(std::move(samples));
  st.conditions_on = sorted(std::move(conditions));
  st.marginalized_out = sorted(std::move(marginalized));
  return st;
}

StepSpec mh(IdSet samples, IdSet conditions, IdSet marginalized, JumpDescriptor jump) {
  StepSpec st;
  st.kind = StepSpec::Kind::MH;
  st.samples = sorted(std::move(samples));
  st.conditions_on = sorted(std::move(conditions));
  st.marginalized_out = sorted(std::move(marginalized));
  st.jump = std::move(jump);
  return st;
}

StepSpec iterated(IdSet samples, IdSet conditions, IdSet marginalized, JumpDescriptor jump,
                  int l) {
  StepSpec st = mh(std::move(samples), std::move(conditions), std::move(marginalized),
                   std::move(jump));
  st.kind = StepSpec::Kind::IteratedMH;
  st.iterations = l;
  return st;
}

SamplerSpec make(std::string name, std::string model, std::vector<ComponentId> components,
                 std::vector<StepSpec> steps) {
  SamplerSpec s;
  s.name = std::move(name);
  s.model_ref = std::move(model);
  s.components = std::move(components);
  s.steps = std::move(steps);
  return s;
}

SamplerSpec rotate(const SamplerSpec& base, std::string name, int first_step) {
  SamplerSpec out = base;
  out.name = std::move(name);
  out.steps.clear();
  const int k = static_cast<int>(base.steps.size());
  for (int i = 0; i < k; ++i) out.steps.push_back(base.steps[(first_step + i) % k]);
  return out;
}

}  // namespace

std::map<std::string, SamplerSpec> sampler_registry(const RegistryConfig& config) {
  std::map<std::string, SamplerSpec> reg;
  const int n_bins = config.spectral_bins;

  // --- Spectral model with latent X: validator inputs only. ---
  const std::vector<ComponentId> latent_comps{"X", "XL", "theta", "mu"};
  reg["sampler1"] = make("sampler1", "spectral_latent", latent_comps,
                         {
                             direct({"X", "XL"}, {"mu", "theta"}),
                             direct({"theta"}, {"X", "XL", "mu"}),
                             direct({"mu"}, {"X", "XL", "theta"}),
                         });
  reg["sampler2"] = make("sampler2", "spectral_latent", latent_comps,
                         {
                             direct({"XL", "mu"}, {"X", "theta"}),
                             direct({"X", "XL"}, {"mu", "theta"}),
                             direct({"theta"}, {"X", "XL", "mu"}),
                         });
  reg["sampler3"] = make("sampler3", "spectral_latent", latent_comps,
                         {
                             direct({"mu"}, {"X", "theta"}, {"XL"}),
                             direct({"X", "XL"}, {"mu", "theta"}),
                             direct({"theta"}, {"X", "XL", "mu"}),
                         });
  reg["sampler3_rot2"] = rotate(reg["sampler3"], "sampler3_rot2", 2);
  reg["sampler3_rot_mu"] = rotate(reg["sampler3"], "sampler3_rot_mu", 1);

  // --- Bivariate normal; the jumping rule is a Gaussian walk with variance
  // 3 in both samplers, held fixed. ---
  const std::vector<ComponentId> biv{"psi1", "psi2"};
  const JumpDescriptor walk_var3 = JumpDescriptor::normal_walk(std::sqrt(3.0));
  reg["sampler4"] = make("sampler4", "bivariate", biv,
                         {
                             direct({"psi1"}, {"psi2"}),
                             mh({"psi2"}, {"psi1"}, {}, walk_var3),
                         });
  reg["sampler5"] = make("sampler5", "bivariate", biv,
                         {
                             direct({"psi1"}, {}, {"psi2"}),
                             mh({"psi2"}, {"psi1"}, {}, walk_var3),
                         });

  // --- Spectral model, X observed. Univariate walks target 40% acceptance,
  // bivariate walks 20%. ---
  const std::vector<ComponentId> spec_comps{"alpha", "beta", "gamma", "mu", "phi", "XL"};
  const auto beta_walk = JumpDescriptor::normal_walk(0.1, 0.4);
  const auto phi_walk = JumpDescriptor::normal_walk(0.1, 0.4);
  const auto mu_jump = JumpDescriptor::discrete_uniform(n_bins);
  reg["spectral_parent"] =
      make("spectral_parent", "spectral", spec_comps,
           {
               direct({"XL"}, {"alpha", "beta", "gamma", "mu", "phi"}),
               direct({"alpha"}, {"XL", "beta", "gamma", "mu", "phi"}),
               mh({"beta"}, {"XL", "alpha", "gamma", "mu", "phi"}, {}, beta_walk),
               direct({"gamma"}, {"XL", "alpha", "beta", "mu", "phi"}),
               mh({"mu"}, {"XL", "alpha", "beta", "gamma", "phi"}, {}, mu_jump),
               mh({"phi"}, {"XL", "alpha", "beta", "gamma", "mu"}, {}, phi_walk),
           });
  reg["sampler6"] =
      make("sampler6", "spectral", spec_comps,
           {
               mh({"mu"}, {"beta", "gamma", "phi"}, {"XL", "alpha"}, mu_jump),
               mh({"phi"}, {"beta", "gamma", "mu"}, {"XL", "alpha"}, phi_walk),
               mh({"beta"}, {"gamma", "mu", "phi"}, {"XL", "alpha"}, beta_walk),
               direct({"alpha"}, {"beta", "gamma", "mu", "phi"}, {"XL"}),
               direct({"XL"}, {"alpha", "beta", "gamma", "mu", "phi"}),
               direct({"gamma"}, {"XL", "alpha", "beta", "mu", "phi"}),
           });
  {
    // Sampler 7(a): steps 3 and 4 of Sampler 6 blocked into one MH update,
    // proposing beta by the walk and alpha from its exact conditional.
    JumpDescriptor concat =
        JumpDescriptor::concat_conditional({"alpha"}, beta_walk);
    concat.depends_on = make_set({"gamma", "mu", "phi"});
    reg["sampler7a"] =
        make("sampler7a", "spectral", spec_comps,
             {
                 mh({"mu"}, {"beta", "gamma", "phi"}, {"XL", "alpha"}, mu_jump),
                 mh({"phi"}, {"beta", "gamma", "mu"}, {"XL", "alpha"}, phi_walk),
                 mh({"alpha", "beta"}, {"gamma", "mu", "phi"}, {"XL"}, concat),
                 direct({"XL"}, {"alpha", "beta", "gamma", "mu", "phi"}),
                 direct({"gamma"}, {"XL", "alpha", "beta", "mu", "phi"}),
             });
    // Sampler 7(b): the same blocking with an independent bivariate normal
    // walk on (alpha, beta).
    Eigen::Matrix2d cov;
    cov << 0.25, 0.0, 0.0, 0.001;
    reg["sampler7b"] = reg["sampler7a"];
    reg["sampler7b"].name = "sampler7b";
    reg["sampler7b"].steps[2].jump = JumpDescriptor::mvnormal_walk(cov, 0.2);
  }
  reg["sampler10"] =
      make("sampler10", "spectral", spec_comps,
           {
               mh({"mu"}, {"alpha", "beta", "gamma", "phi"}, {"XL"}, mu_jump),
               direct({"XL"}, {"alpha", "beta", "gamma", "mu", "phi"}),
               direct({"alpha"}, {"XL", "beta", "gamma", "mu", "phi"}),
               mh({"beta"}, {"XL", "alpha", "gamma", "mu", "phi"}, {}, beta_walk),
               direct({"gamma"}, {"XL", "alpha", "beta", "mu", "phi"}),
               mh({"phi"}, {"XL", "alpha", "beta", "gamma", "mu"}, {}, phi_walk),
           });
  {
    Eigen::Matrix2d cov;  // flattened order (beta, phi)
    cov << 0.01, 0.0, 0.0, 0.01;
    reg["sampler11"] =
        make("sampler11", "spectral", spec_comps,
             {
                 mh({"mu"}, {"beta", "gamma", "phi"}, {"XL", "alpha"}, mu_jump),
                 mh({"beta", "phi"}, {"gamma", "mu"}, {"XL", "alpha"},
                    JumpDescriptor::mvnormal_walk(cov, 0.2)),
                 direct({"alpha"}, {"beta", "gamma", "mu", "phi"}, {"XL"}),
                 direct({"XL"}, {"alpha", "beta", "gamma", "mu", "phi"}),
                 direct({"gamma"}, {"XL", "alpha", "beta", "mu", "phi"}),
             });
  }

  // --- Calibration model. ---
  const std::vector<ComponentId> cal_comps{"Z", "alpha", "beta"};
  const auto cal_beta_walk = JumpDescriptor::normal_walk(0.01, 0.55);
  reg["sampler8"] = make("sampler8", "calibration", cal_comps,
                         {
                             direct({"Z"}, {}, {"alpha", "beta"}),
                             mh({"beta"}, {"Z", "alpha"}, {}, cal_beta_walk),
                             direct({"alpha"}, {"Z", "beta"}),
                         });
  reg["sampler9"] = make("sampler9", "calibration", cal_comps,
                         {
                             direct({"Z"}, {}, {"alpha", "beta"}),
                             iterated({"beta"}, {"Z"}, {"alpha"}, cal_beta_walk,
                                      config.iterated_l_calibration),
                             direct({"alpha"}, {"Z", "beta"}),
                         });

  // --- Factor model. ---
  {
    const int p = config.factor_p;
    std::vector<ComponentId> comps{"Z"};
    IdSet sigma_all;
    for (int j = 1; j <= p; ++j) {
      comps.push_back(FactorModel::sigma_id(j));
      set_insert(sigma_all, FactorModel::sigma_id(j));
    }
    comps.push_back("beta");
    const IdSet all = [&] {
      IdSet s(comps.begin(), comps.end());
      std::sort(s.begin(), s.end());
      return s;
    }();
    std::vector<StepSpec> s12{
        direct({"Z"}, set_minus(all, {"Z"})),
        direct(sigma_all, set_minus(all, sigma_all)),
        direct({"beta"}, set_minus(all, {"beta"})),
    };
    reg["sampler12"] = make("sampler12", "factor", comps, std::move(s12));

    std::vector<StepSpec> s13;
    s13.push_back(direct({FactorModel::sigma_id(1)},
                         set_minus(all, {FactorModel::sigma_id(1)})));
    for (int j = 2; j <= p; ++j) {
      const IdSet sj{FactorModel::sigma_id(j)};
      s13.push_back(mh(sj, set_minus(set_minus(all, sj), {"Z"}), {"Z"},
                       JumpDescriptor::log_normal_walk(0.5, 0.4)));
    }
    s13.push_back(direct({"Z"}, set_minus(all, {"Z"})));
    s13.push_back(direct({"beta"}, set_minus(all, {"beta"})));
    reg["sampler13"] = make("sampler13", "factor", comps, std::move(s13));
  }

  // --- Two-step fragments on small Gaussian targets. ---
  const std::vector<ComponentId> g3{"psi1", "psi2", "psi3"};
  const auto g_walk = JumpDescriptor::normal_walk(1.0, 0.4);
  reg["fragment1"] = make("fragment1", "gaussian3", g3,
                          {
                              direct({"psi1", "psi2"}, {"psi3"}),
                              mh({"psi2"}, {"psi1", "psi3"}, {}, g_walk),
                              direct({"psi3"}, {"psi1", "psi2"}),
                          });
  // The naive trim removes psi2 from the first draw even though the MH
  // kernel still reads it.
  reg["fragment1_naive"] = make("fragment1_naive", "gaussian3", g3,
                                {
                                    direct({"psi1"}, {"psi3"}, {"psi2"}),
                                    mh({"psi2"}, {"psi1", "psi3"}, {}, g_walk),
                                    direct({"psi3"}, {"psi1", "psi2"}),
                                });
  reg["fragment6_parent"] = make("fragment6_parent", "gaussian3", g3,
                                 {
                                     direct({"psi3"}, {"psi1", "psi2"}),
                                     direct({"psi2"}, {"psi1", "psi3"}),
                                     direct({"psi1"}, {"psi2", "psi3"}),
                                 });
  reg["fragment6"] = make("fragment6", "gaussian3", g3,
                          {
                              direct({"psi3"}, {"psi1", "psi2"}),
                              mh({"psi1"}, {"psi3"}, {"psi2"}, g_walk),
                              direct({"psi2"}, {"psi1", "psi3"}),
                          });
  reg["fragment7"] = make("fragment7", "gaussian3", g3,
                          {
                              direct({"psi3"}, {"psi1", "psi2"}),
                              mh({"psi1", "psi2"}, {"psi3"}, {},
                                 JumpDescriptor::concat_conditional({"psi2"}, g_walk)),
                          });
  {
    // The generalization where the marginal draw of the joint rule
    // conditions on a component the step itself samples.
    const std::vector<ComponentId> g4{"psi1", "psi2", "psi3", "psi4"};
    JumpDescriptor inner = JumpDescriptor::normal_walk(1.0, 0.4);
    JumpDescriptor joint = JumpDescriptor::concat_marginal(
        {"psi1"}, inner, make_set({"psi3", "psi4"}));
    joint.depends_on = make_set({"psi4"});
    reg["fragment5_joint"] =
        make("fragment5_joint", "gaussian4", g4,
             {
                 mh({"psi1", "psi2", "psi3"}, {"psi4"}, {}, joint),
                 direct({"psi4"}, {"psi1", "psi2", "psi3"}),
             });
  }

  for (auto& [name, spec] : reg) spec.check_structure();
  return reg;
}

SamplerSpec registry_get(const std::string& name, const RegistryConfig& config) {
  auto reg = sampler_registry(config);
  auto it = reg.find(name);
  if (it == reg.end()) throw std::out_of_range("unknown sampler '" + name + "'");
  return it->second;
}

std::optional<std::string> registry_parent_name(const std::string& name) {
  if (name == "sampler3" || name == "sampler3_rot2" || name == "sampler3_rot_mu") {
    return "sampler1";
  }
  if (name == "sampler6" || name == "sampler7a" || name == "sampler7b" ||
      name == "sampler10" || name == "sampler11") {
    return "spectral_parent";
  }
  if (name == "sampler13") return "sampler12";
  if (name == "fragment6") return "fragment6_parent";
  return std::nullopt;
}

}  // namespace mhpcg
