#include "mhpcg/model.hpp"

#include "mhpcg/errors.hpp"

namespace mhpcg {

double ModelBackend::log_exact_conditional(const StepSets&, const ComponentState&) const {
  throw MissingConditional(name() + ": no normalized exact conditional for this partition");
}

}  // namespace mhpcg
