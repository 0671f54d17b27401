#pragma once

#include <map>
#include <optional>
#include <string>

#include "mhpcg/spec.hpp"

namespace mhpcg {

/// Model shapes the registered specs are written against.
struct RegistryConfig {
  int spectral_bins = 550;
  int calibration_q = 7;
  int factor_p = 5;
  int iterated_l_calibration = 20;
};

/// All samplers from the paper as executable or validator-input specs, plus
/// the two-step fragments used by the validator suite:
///   sampler1..sampler3      spectral model with latent X (validator inputs)
///   sampler3_rot2/_rot_mu   cyclic rotations of sampler3
///   sampler4, sampler5      bivariate normal
///   sampler6, sampler7a, sampler7b, sampler10, sampler11   spectral
///   sampler8, sampler9      calibration
///   sampler12, sampler13    factor
///   fragment1, fragment1_naive, fragment5_joint, fragment6, fragment7
/// Parents for derivations are registered as *_parent entries.
std::map<std::string, SamplerSpec> sampler_registry(const RegistryConfig& config = {});

/// Lookup with an UnknownSampler-style error on a miss.
SamplerSpec registry_get(const std::string& name, const RegistryConfig& config = {});

/// The parent spec used to certify `name`, when one is registered.
std::optional<std::string> registry_parent_name(const std::string& name);

}  // namespace mhpcg
