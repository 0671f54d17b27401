#include "mhpcg/validator.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mhpcg/errors.hpp"

namespace mhpcg {

namespace {

std::string join_ids(const IdSet& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ",";
    out += ids[i];
  }
  return out.empty() ? "-" : out;
}

bool mh_family(StepSpec::Kind k) {
  return k == StepSpec::Kind::MH || k == StepSpec::Kind::StarKernel ||
         k == StepSpec::Kind::IteratedMH;
}

/// Structural equality of two sweeps up to jumping-rule details.
bool structurally_equal(const SamplerSpec& a, const SamplerSpec& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const StepSpec& x = a.steps[i];
    const StepSpec& y = b.steps[i];
    if (x.samples != y.samples || x.conditions_on != y.conditions_on ||
        x.marginalized_out != y.marginalized_out) {
      return false;
    }
    if (mh_family(x.kind) != mh_family(y.kind)) return false;
    if (mh_family(x.kind)) {
      const IdSet tx = x.kind == StepSpec::Kind::StarKernel ? x.star_trailing : IdSet{};
      const IdSet ty = y.kind == StepSpec::Kind::StarKernel ? y.star_trailing : IdSet{};
      if (tx != ty) return false;
    }
  }
  return true;
}

}  // namespace

void check_parent_gibbs(const SamplerSpec& spec) {
  spec.check_structure();
  IdSet seen;
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    const StepSpec& st = spec.steps[i];
    if (!st.is_full()) {
      throw std::invalid_argument(spec.name + ": parent step " + std::to_string(i + 1) +
                                  " is not a full step");
    }
    if (!set_intersect(seen, st.samples).empty()) {
      throw std::invalid_argument(spec.name + ": parent samples a component twice");
    }
    seen = set_union(seen, st.samples);
  }
}

SamplerSpec reduce_conditioning(const SamplerSpec& spec, int step_index,
                                const IdSet& extra, const IdSet& mh_inner_extra) {
  if (step_index < 0 || step_index >= static_cast<int>(spec.steps.size())) {
    throw IllegalReduction("step index out of range");
  }
  SamplerSpec out = spec;
  StepSpec& st = out.steps[static_cast<std::size_t>(step_index)];
  if (extra.empty()) return out;
  if (!set_intersect(extra, st.samples).empty()) {
    throw IllegalReduction("reduce set intersects the sampled set");
  }
  if (!set_subset(extra, st.conditions_on)) {
    throw IllegalReduction("reduce set is not conditioned on by the step");
  }
  if (!set_subset(mh_inner_extra, extra)) {
    throw IllegalReduction("inner extension must be part of the reduce set");
  }
  st.samples = set_union(st.samples, extra);
  st.conditions_on = set_minus(st.conditions_on, extra);
  if (mh_family(st.kind)) {
    // A reduced MH step becomes the star kernel: the inner MH now targets the
    // conditional with `extra` integrated out and the trailing exact draw
    // refreshes the rest.
    st.kind = StepSpec::Kind::StarKernel;
    st.star_trailing = set_union(st.star_trailing, set_minus(extra, mh_inner_extra));
  }
  return out;
}

SamplerSpec permute(const SamplerSpec& spec, const std::vector<int>& order) {
  if (order.size() != spec.steps.size()) {
    throw std::invalid_argument("permutation size mismatch");
  }
  std::vector<int> check = order;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < check.size(); ++i) {
    if (check[i] != static_cast<int>(i)) {
      throw std::invalid_argument("not a permutation of the step indices");
    }
  }
  SamplerSpec out = spec;
  out.steps.clear();
  for (int idx : order) out.steps.push_back(spec.steps[static_cast<std::size_t>(idx)]);
  return out;
}

std::vector<RedundantDraw> find_redundant(const SamplerSpec& spec) {
  std::vector<RedundantDraw> result;
  const int k = static_cast<int>(spec.steps.size());
  for (int i = 0; i < k; ++i) {
    IdSet redundant;
    for (const auto& c : spec.steps[static_cast<std::size_t>(i)].samples) {
      // Scan forward to the end of the sweep; the state at the sweep
      // boundary is the output, which reads everything, so surviving the
      // sweep means not redundant.
      for (int j = i + 1; j < k; ++j) {
        const StepSpec& sj = spec.steps[static_cast<std::size_t>(j)];
        if (set_contains(sj.kernel_dependencies(), c)) break;
        if (set_contains(sj.samples, c)) {
          set_insert(redundant, c);
          break;
        }
      }
    }
    if (!redundant.empty()) result.push_back({i, redundant});
  }
  return result;
}

SamplerSpec trim(const SamplerSpec& spec, int step_index, const IdSet& subset) {
  if (subset.empty()) return spec;
  const auto redundant = find_redundant(spec);
  const auto it = std::find_if(redundant.begin(), redundant.end(),
                               [&](const RedundantDraw& r) { return r.step_index == step_index; });
  if (it == redundant.end() || !set_subset(subset, it->subset)) {
    throw NotRedundant("subset {" + join_ids(subset) + "} of step " +
                       std::to_string(step_index + 1) +
                       " is read before being re-sampled (or is sweep output)");
  }
  SamplerSpec out = spec;
  StepSpec& st = out.steps[static_cast<std::size_t>(step_index)];
  st.samples = set_minus(st.samples, subset);
  st.marginalized_out = set_union(st.marginalized_out, subset);
  if (st.kind == StepSpec::Kind::StarKernel) {
    st.star_trailing = set_minus(st.star_trailing, subset);
    if (st.star_trailing.empty()) st.kind = StepSpec::Kind::MH;
  }
  if (st.samples.empty()) {
    out.steps.erase(out.steps.begin() + step_index);
  }
  return out;
}

SamplerSpec DerivationTrace::replay() const {
  SamplerSpec cur = parent;
  for (const auto& ph : phases) {
    switch (ph.kind) {
      case PhaseRecord::Kind::SplitStep: {
        const StepSpec original = cur.steps[static_cast<std::size_t>(ph.step_index)];
        std::vector<StepSpec> split;
        for (const auto& part : ph.parts) {
          StepSpec st = original;
          st.samples = part;
          st.conditions_on =
              set_union(original.conditions_on, set_minus(original.samples, part));
          split.push_back(std::move(st));
        }
        cur.steps.erase(cur.steps.begin() + ph.step_index);
        cur.steps.insert(cur.steps.begin() + ph.step_index, split.begin(), split.end());
        break;
      }
      case PhaseRecord::Kind::ReduceConditioning: {
        const bool was_direct =
            !mh_family(cur.steps[static_cast<std::size_t>(ph.step_index)].kind);
        if (was_direct && !ph.mh_inner_extra.empty()) {
          // The enlarged conditional is realized as a star kernel (the
          // direct joint draw is not available); flip the kind first.
          cur.steps[static_cast<std::size_t>(ph.step_index)].kind = StepSpec::Kind::MH;
        }
        cur = reduce_conditioning(cur, ph.step_index, ph.ids,
                                  set_intersect(ph.mh_inner_extra, ph.ids));
        break;
      }
      case PhaseRecord::Kind::Permute:
        cur = permute(cur, ph.order);
        break;
      case PhaseRecord::Kind::Trim: {
        if (ph.absorbed_step) {
          cur.steps.erase(cur.steps.begin() + ph.step_index);
        } else {
          cur = trim(cur, ph.step_index, ph.ids);
        }
        break;
      }
    }
  }
  return cur;
}

std::string DerivationTrace::text() const {
  std::ostringstream out;
  out << "parent: " << parent.name << "\n";
  for (const auto& ph : phases) {
    switch (ph.kind) {
      case PhaseRecord::Kind::SplitStep:
        out << "  split step " << ph.step_index + 1 << " into " << ph.parts.size()
            << " per-component full steps\n";
        break;
      case PhaseRecord::Kind::ReduceConditioning:
        out << "  reduce conditioning: step " << ph.step_index + 1 << " also samples {"
            << join_ids(ph.ids) << "}";
        if (!ph.mh_inner_extra.empty()) {
          out << " (inner MH block extended by {" << join_ids(ph.mh_inner_extra) << "})";
        }
        out << "\n";
        break;
      case PhaseRecord::Kind::Permute: {
        out << "  permute steps to order (";
        for (std::size_t i = 0; i < ph.order.size(); ++i) {
          if (i) out << ",";
          out << ph.order[i] + 1;
        }
        out << ")\n";
        break;
      }
      case PhaseRecord::Kind::Trim:
        if (ph.absorbed_step) {
          out << "  trim step " << ph.step_index + 1
              << " entirely (duplicate kernel with the same stationary target follows)\n";
        } else {
          out << "  trim {" << join_ids(ph.ids) << "} from step " << ph.step_index + 1
              << "\n";
        }
        break;
    }
  }
  return out.str();
}

namespace {

// ----- validate -------------------------------------------------------

struct LintResult {
  std::vector<RuleViolation> violations;
  std::vector<std::string> conditions;
};

LintResult lint(const SamplerSpec& spec) {
  LintResult res;
  const int k = static_cast<int>(spec.steps.size());
  for (int i = 0; i < k; ++i) {
    const StepSpec& st = spec.steps[static_cast<std::size_t>(i)];
    if (st.kind == StepSpec::Kind::IteratedMH) {
      res.conditions.push_back(
          "step " + std::to_string(i + 1) + " uses iterated MH with L=" +
          std::to_string(st.iterations) +
          "; exact only in the limit, so the verdict is approximate and the "
          "lag-one autocorrelation diagnostic applies");
      continue;  // treated as an exact conditional draw
    }
    if (st.kind == StepSpec::Kind::MH || st.kind == StepSpec::Kind::StarKernel) {
      // The kernel depends on (samples, conditions, jump reads); none of it
      // may have been trimmed in the previous step. Step 1 follows the last
      // step of the previous sweep.
      const StepSpec& prev = spec.steps[static_cast<std::size_t>((i + k - 1) % k)];
      const IdSet bad = set_intersect(st.kernel_dependencies(), prev.marginalized_out);
      if (!bad.empty()) {
        res.violations.push_back(
            {i, "mh-after-trim",
             "the MH kernel of step " + std::to_string(i + 1) + " reads {" +
                 join_ids(bad) + "}, trimmed in the previous step"});
      }
    }
    if (st.jump && st.jump->kind == JumpDescriptor::Kind::ConcatMarginalDraw) {
      const IdSet overlap = set_intersect(st.jump->exact_conditions, st.samples);
      if (!overlap.empty()) {
        res.conditions.push_back(
            "step " + std::to_string(i + 1) +
            " concatenates a marginal draw that conditions on {" + join_ids(overlap) +
            "}, which the step itself samples; the rule's stationary law is not a "
            "conditional of the target, so the verdict is approximate");
      }
    }
  }
  return res;
}

bool all_full_steps(const SamplerSpec& spec) {
  return std::all_of(spec.steps.begin(), spec.steps.end(),
                     [](const StepSpec& st) { return st.is_full(); });
}

bool telescoping_exact(const SamplerSpec& spec) {
  const int k = static_cast<int>(spec.steps.size());
  IdSet sampled_later;
  for (int i = k - 1; i >= 0; --i) {
    const StepSpec& st = spec.steps[static_cast<std::size_t>(i)];
    if (st.kind != StepSpec::Kind::DirectDraw && st.kind != StepSpec::Kind::IteratedMH) {
      return false;
    }
    if (st.marginalized_out != sampled_later) return false;
    if (!set_intersect(st.samples, sampled_later).empty()) return false;
    sampled_later = set_union(sampled_later, st.samples);
  }
  return true;
}

// One candidate ancestor in the reduced (phase 1) sampler.
struct Ancestor {
  StepSpec step;       // full step: samples = S_f u M_f
  int parent_index;    // provenance in the normalized parent
  int final_index;     // -1 for doomed duplicates
  int partner_final;   // doomed: the final step whose kernel absorbs it
  IdSet reduce_set;
  IdSet inner_extra;
};

struct SearchState {
  const SamplerSpec* spec = nullptr;
  SamplerSpec parent_norm;
  std::vector<PhaseRecord> normalization;
  std::vector<Ancestor> ancestors;  // parent order
  std::vector<PhaseRecord> phases_out;
  SamplerSpec derived;
};

/// Split parent DirectDraw blocks whose components the final spec samples in
/// separate steps (legal: a block draw and the within-block Gibbs scan are
/// both full-step sweeps preserving the target).
void normalize_parent(const SamplerSpec& spec, SearchState& ss) {
  SamplerSpec& parent = ss.parent_norm;
  for (int i = 0; i < static_cast<int>(parent.steps.size());) {
    const StepSpec& st = parent.steps[static_cast<std::size_t>(i)];
    bool split_done = false;
    if (st.kind == StepSpec::Kind::DirectDraw && st.samples.size() > 1) {
      // Parts are the distinct intersections with the final steps' sampled
      // (plus trimmed) sets; split only when they partition the block.
      std::vector<IdSet> parts;
      IdSet covered;
      bool ok = true;
      for (const auto& f : spec.steps) {
        const IdSet part = set_intersect(st.samples, set_union(f.samples, f.marginalized_out));
        if (part.empty()) continue;
        if (std::find(parts.begin(), parts.end(), part) != parts.end()) continue;
        if (!set_intersect(part, covered).empty()) {
          ok = false;
          break;
        }
        parts.push_back(part);
        covered = set_union(covered, part);
      }
      if (ok && covered == st.samples && parts.size() > 1) {
        PhaseRecord rec;
        rec.kind = PhaseRecord::Kind::SplitStep;
        rec.step_index = i;
        rec.parts = parts;
        rec.note = "per-component scan of a conditionally factorizing block";
        ss.normalization.push_back(rec);
        std::vector<StepSpec> split;
        for (const auto& part : parts) {
          StepSpec s = st;
          s.samples = part;
          s.conditions_on = set_union(st.conditions_on, set_minus(st.samples, part));
          split.push_back(std::move(s));
        }
        parent.steps.erase(parent.steps.begin() + i);
        parent.steps.insert(parent.steps.begin() + i, split.begin(), split.end());
        i += static_cast<int>(parts.size());
        split_done = true;
      }
    }
    if (!split_done) ++i;
  }
}

IdSet reads_of(const StepSpec& st) { return st.kernel_dependencies(); }

/// Verify the required trims/absorptions on the permuted phase-1 list and
/// build the final sampler; records phases into out on success.
bool apply_trims(const SamplerSpec& spec, std::vector<Ancestor> order,
                 std::vector<PhaseRecord>& out, SamplerSpec& derived) {
  // Absorb doomed duplicates first: with no trims applied yet, the doomed
  // step and its partner carry identical full partitions.
  bool progress = true;
  auto touches = [](const StepSpec& st, const IdSet& s) {
    return !set_intersect(reads_of(st), s).empty() ||
           !set_intersect(st.samples, s).empty();
  };
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i].final_index >= 0) continue;
      const StepSpec& d = order[i].step;
      // The first later step touching the doomed samples must be an
      // MH-family kernel with the identical partition.
      bool resolved = false;
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        const StepSpec& n = order[j].step;
        if (!touches(n, d.samples)) continue;
        const bool duplicate_kernel =
            mh_family(d.kind) && mh_family(n.kind) && n.samples == d.samples &&
            n.conditions_on == d.conditions_on &&
            n.marginalized_out == d.marginalized_out;
        const bool resampled_unread =
            set_intersect(reads_of(n), d.samples).empty() &&
            set_subset(d.samples, n.samples);
        if (duplicate_kernel || resampled_unread) {
          PhaseRecord rec;
          rec.kind = PhaseRecord::Kind::Trim;
          rec.step_index = static_cast<int>(i);
          rec.ids = d.samples;
          rec.absorbed_step = true;
          rec.note = duplicate_kernel
                         ? "same stationary conditional re-sampled by the next kernel"
                         : "entire draw re-sampled before any read";
          out.push_back(rec);
          order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
          resolved = true;
        }
        break;
      }
      if (resolved) {
        progress = true;
        break;
      }
      return false;  // a doomed step could not be absorbed
    }
  }

  // Now the set trims, iterating to a fixpoint since one trim can unblock
  // another.
  SamplerSpec work;
  work.name = spec.name;
  work.model_ref = spec.model_ref;
  work.components = spec.components;
  for (const auto& a : order) work.steps.push_back(a.step);
  std::vector<IdSet> pending(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    pending[i] = spec.steps[static_cast<std::size_t>(order[i].final_index)].marginalized_out;
  }
  progress = true;
  while (progress) {
    progress = false;
    const auto redundant = find_redundant(work);
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (pending[i].empty()) continue;
      const auto it = std::find_if(redundant.begin(), redundant.end(), [&](const auto& r) {
        return r.step_index == static_cast<int>(i);
      });
      if (it == redundant.end() || !set_subset(pending[i], it->subset)) continue;
      work = trim(work, static_cast<int>(i), pending[i]);
      PhaseRecord rec;
      rec.kind = PhaseRecord::Kind::Trim;
      rec.step_index = static_cast<int>(i);
      rec.ids = pending[i];
      out.push_back(rec);
      pending[i].clear();
      progress = true;
      break;  // indices stay valid (trim never erases: samples stay nonempty)
    }
  }
  for (const auto& p : pending) {
    if (!p.empty()) return false;
  }
  derived = work;
  return structurally_equal(work, spec);
}

bool try_matching(const SamplerSpec& spec, SearchState& ss,
                  const std::vector<int>& match,  // final index -> parent index
                  const std::vector<std::pair<int, int>>& doomed) {  // parent idx, partner final
  const auto& parent = ss.parent_norm;
  std::vector<Ancestor> by_parent(parent.steps.size());
  auto build_ancestor = [&](int p_idx, int f_idx, bool is_doomed) {
    const StepSpec& p = parent.steps[static_cast<std::size_t>(p_idx)];
    const StepSpec& f = spec.steps[static_cast<std::size_t>(f_idx)];
    Ancestor a;
    a.parent_index = p_idx;
    a.final_index = is_doomed ? -1 : f_idx;
    a.partner_final = is_doomed ? f_idx : -1;
    const IdSet full = set_union(f.samples, f.marginalized_out);
    if (!set_subset(p.samples, full)) return std::optional<Ancestor>{};
    a.reduce_set = set_minus(full, p.samples);
    if (!set_subset(a.reduce_set, p.conditions_on)) return std::optional<Ancestor>{};
    StepSpec st = p;
    st.samples = full;
    st.conditions_on = set_minus(p.conditions_on, a.reduce_set);
    st.marginalized_out = {};
    if (mh_family(f.kind)) {
      st.jump = f.jump;
      a.inner_extra = set_minus(set_intersect(f.samples, a.reduce_set), p.samples);
      if (f.marginalized_out.empty() && a.reduce_set.empty()) {
        st.kind = StepSpec::Kind::MH;
        st.star_trailing = {};
      } else if (f.marginalized_out.empty()) {
        st.kind = StepSpec::Kind::MH;
        st.star_trailing = {};
      } else {
        st.kind = StepSpec::Kind::StarKernel;
        st.star_trailing = f.marginalized_out;
      }
    } else {
      st.kind = StepSpec::Kind::DirectDraw;
      st.star_trailing = {};
    }
    a.step = std::move(st);
    return std::optional<Ancestor>{std::move(a)};
  };

  for (std::size_t f = 0; f < match.size(); ++f) {
    auto a = build_ancestor(match[f], static_cast<int>(f), false);
    if (!a) return false;
    by_parent[static_cast<std::size_t>(match[f])] = std::move(*a);
  }
  for (const auto& [p_idx, partner] : doomed) {
    auto a = build_ancestor(p_idx, partner, true);
    if (!a) return false;
    // The doomed kernel must be interchangeable with its partner's.
    const Ancestor& partner_anc = by_parent[static_cast<std::size_t>(match[partner])];
    if (a->step.samples != partner_anc.step.samples ||
        a->step.conditions_on != partner_anc.step.conditions_on) {
      return false;
    }
    by_parent[static_cast<std::size_t>(p_idx)] = std::move(*a);
  }

  // Permutation: matched ancestors in final order, each doomed step placed
  // directly before its partner (other insertion points are tried after).
  std::vector<Ancestor> base;
  for (std::size_t f = 0; f < match.size(); ++f) {
    base.push_back(by_parent[static_cast<std::size_t>(match[f])]);
  }
  std::vector<std::vector<Ancestor>> arrangements;
  {
    std::vector<Ancestor> with_doomed = base;
    // insert doomed in partner order; all "immediately before partner"
    for (const auto& [p_idx, partner] : doomed) {
      const Ancestor& a = by_parent[static_cast<std::size_t>(p_idx)];
      auto pos = std::find_if(with_doomed.begin(), with_doomed.end(), [&](const Ancestor& x) {
        return x.final_index == partner;
      });
      with_doomed.insert(pos, a);
    }
    arrangements.push_back(std::move(with_doomed));
  }

  for (auto& order : arrangements) {
    std::vector<PhaseRecord> phases;
    // Phase 1 records in parent order.
    for (const auto& a : by_parent) {
      if (a.step.samples.empty()) continue;  // unused slot (shouldn't happen)
      if (!a.reduce_set.empty()) {
        PhaseRecord rec;
        rec.kind = PhaseRecord::Kind::ReduceConditioning;
        rec.step_index = a.parent_index;
        rec.ids = a.reduce_set;
        rec.mh_inner_extra = a.inner_extra;
        phases.push_back(rec);
      }
    }
    // Phase 2 record.
    {
      PhaseRecord rec;
      rec.kind = PhaseRecord::Kind::Permute;
      for (const auto& a : order) rec.order.push_back(a.parent_index);
      phases.push_back(rec);
    }
    SamplerSpec derived;
    std::vector<PhaseRecord> trim_phases;
    if (apply_trims(spec, order, trim_phases, derived)) {
      phases.insert(phases.end(), trim_phases.begin(), trim_phases.end());
      ss.phases_out = std::move(phases);
      ss.derived = std::move(derived);
      return true;
    }
  }
  return false;
}

bool search_derivation(const SamplerSpec& spec, const SamplerSpec& parent, SearchState& ss) {
  ss.spec = &spec;
  ss.parent_norm = parent;
  normalize_parent(spec, ss);
  const int np = static_cast<int>(ss.parent_norm.steps.size());
  const int nf = static_cast<int>(spec.steps.size());
  if (np > 8 || nf > 8) {
    throw SearchExhausted("derivation search supports at most eight steps");
  }
  if (nf > np) return false;

  // Candidate parent steps per final step.
  std::vector<std::vector<int>> candidates(static_cast<std::size_t>(nf));
  for (int f = 0; f < nf; ++f) {
    const StepSpec& sf = spec.steps[static_cast<std::size_t>(f)];
    const IdSet full = set_union(sf.samples, sf.marginalized_out);
    for (int p = 0; p < np; ++p) {
      const StepSpec& sp = ss.parent_norm.steps[static_cast<std::size_t>(p)];
      if (set_subset(sp.samples, full) && !set_intersect(sp.samples, sf.samples).empty()) {
        candidates[static_cast<std::size_t>(f)].push_back(p);
      }
    }
    if (candidates[static_cast<std::size_t>(f)].empty()) return false;
  }

  std::vector<int> match(static_cast<std::size_t>(nf), -1);
  std::vector<bool> used(static_cast<std::size_t>(np), false);

  std::function<bool(int)> assign = [&](int f) -> bool {
    if (f == nf) {
      // Unmatched parent steps must be absorbable duplicates of some final
      // MH-family kernel.
      std::vector<std::vector<std::pair<int, int>>> doomed_options{{}};
      for (int p = 0; p < np; ++p) {
        if (used[static_cast<std::size_t>(p)]) continue;
        const StepSpec& sp = ss.parent_norm.steps[static_cast<std::size_t>(p)];
        std::vector<int> partners;
        for (int ff = 0; ff < nf; ++ff) {
          const StepSpec& sf = spec.steps[static_cast<std::size_t>(ff)];
          if (!mh_family(sf.kind)) continue;
          if (set_subset(sp.samples, set_union(sf.samples, sf.marginalized_out))) {
            partners.push_back(ff);
          }
        }
        if (partners.empty()) return false;
        std::vector<std::vector<std::pair<int, int>>> next;
        for (const auto& opt : doomed_options) {
          for (int partner : partners) {
            auto copy = opt;
            copy.emplace_back(p, partner);
            next.push_back(std::move(copy));
          }
        }
        doomed_options = std::move(next);
      }
      for (const auto& doomed : doomed_options) {
        if (try_matching(spec, ss, match, doomed)) return true;
      }
      return false;
    }
    for (int p : candidates[static_cast<std::size_t>(f)]) {
      if (used[static_cast<std::size_t>(p)]) continue;
      used[static_cast<std::size_t>(p)] = true;
      match[static_cast<std::size_t>(f)] = p;
      if (assign(f + 1)) return true;
      used[static_cast<std::size_t>(p)] = false;
      match[static_cast<std::size_t>(f)] = -1;
    }
    return false;
  };
  return assign(0);
}

}  // namespace

std::string Verdict::status_name() const {
  switch (status) {
    case Status::Proper: return "proper";
    case Status::ApproximatelyProper: return "approximately_proper";
    case Status::Unverifiable: return "unverifiable";
  }
  return "?";
}

std::string Verdict::to_json() const {
  nlohmann::json out;
  out["status"] = status_name();
  out["conditions"] = conditions;
  out["notes"] = notes;
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : violations) {
    viol.push_back({{"step", v.step_index + 1}, {"rule", v.rule}, {"message", v.message}});
  }
  out["violations"] = std::move(viol);
  if (derivation) out["derivation"] = derivation->text();
  return out.dump(2);
}

std::string Verdict::text() const {
  std::ostringstream out;
  out << "verdict: " << status_name() << "\n";
  for (const auto& v : violations) {
    out << "  violation [" << v.rule << "] " << v.message << "\n";
  }
  for (const auto& c : conditions) out << "  condition: " << c << "\n";
  for (const auto& n : notes) out << "  note: " << n << "\n";
  if (derivation) out << derivation->text();
  return out.str();
}

Verdict validate(const SamplerSpec& spec, const SamplerSpec* parent) {
  spec.check_structure();
  Verdict verdict;

  const LintResult lint_result = lint(spec);
  verdict.conditions = lint_result.conditions;
  if (!lint_result.violations.empty()) {
    verdict.status = Verdict::Status::Unverifiable;
    verdict.violations = lint_result.violations;
    return verdict;
  }

  const auto certify = [&](DerivationTrace trace) {
    verdict.derivation = std::move(trace);
    verdict.status = verdict.conditions.empty() ? Verdict::Status::Proper
                                                : Verdict::Status::ApproximatelyProper;
  };

  if (parent) {
    check_parent_gibbs(*parent);
    SearchState ss;
    if (search_derivation(spec, *parent, ss)) {
      DerivationTrace trace;
      trace.parent = *parent;
      trace.phases = ss.normalization;
      trace.phases.insert(trace.phases.end(), ss.phases_out.begin(), ss.phases_out.end());
      trace.final = ss.derived;
      certify(std::move(trace));
      return verdict;
    }
    verdict.status = Verdict::Status::Unverifiable;
    verdict.violations.push_back(
        {-1, "no-derivation",
         "no three-phase derivation from parent '" + parent->name + "' was found"});
    return verdict;
  }

  if (all_full_steps(spec)) {
    DerivationTrace trace;
    trace.parent = spec;
    trace.final = spec;
    certify(std::move(trace));
    verdict.notes.push_back(
        "every step is a full (complete-conditional or full-MH) update; the sweep "
        "preserves the target directly");
    return verdict;
  }
  if (telescoping_exact(spec)) {
    DerivationTrace trace;
    trace.parent = spec;
    trace.final = spec;
    certify(std::move(trace));
    verdict.notes.push_back(
        "steps form an exact chain-rule factorization: each step's marginalized set "
        "is exactly what later steps sample");
    return verdict;
  }
  if (spec.steps.size() > 8) {
    throw SearchExhausted("more than eight steps and no parent hint");
  }
  verdict.status = Verdict::Status::Unverifiable;
  verdict.violations.push_back(
      {-1, "no-parent",
       "the sweep contains reduced steps; certification needs a parent derivation"});
  return verdict;
}

}  // namespace mhpcg
