#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "loopunif/semiloop.hpp"
#include "loopunif/subst.hpp"
#include "loopunif/term.hpp"
#include "loopunif/unify.hpp"

namespace loopunif {

// One step of the decomposition of sigma_k. The step at recursion depth d
// unifies the (carried-substitution-applied) extendable term against the
// current target, peels the recursion-variable binding t' out of the step
// unifier theta, and passes sh(t') downward. shift_amount records the shift
// (d - 1) this step's theta receives when the trace is composed back into
// sigma_k; all segment and reconstruction arithmetic reads these stored
// amounts.
struct DecompStep {
  std::uint32_t depth = 0;
  std::uint32_t shift_amount = 0;
  Substitution theta;     // recursion variable already removed
  Term t_prime;           // the recursion variable's binding, as produced
  Term residual_target;   // sh(t'): the target handed to the next step
  Substitution sigma_delta;  // sh(sigma·theta) restricted to the x-window
};

struct DecompTrace {
  std::uint32_t k = 0;
  std::vector<DecompStep> steps;  // outermost (depth k) first
  Substitution final_binding;     // {#a -> t' of the innermost step}
};

// The step at depth d; steps run from depth k down to 1.
inline const DecompStep& step_at_depth(const DecompTrace& tr, std::uint32_t d) {
  if (d < 1 || d > tr.k)
    throw std::out_of_range("no step at depth " + std::to_string(d) +
                            " in a trace of depth " + std::to_string(tr.k));
  return tr.steps[tr.k - d];
}

// Rebuild sigma_k: compose the shifted step unifiers outermost-first, then
// close with the recursion-variable binding.
inline Substitution compose_trace(const DecompTrace& tr) {
  Substitution acc;
  for (const auto& st : tr.steps)
    acc = compose(acc, shift_x(st.theta, st.shift_amount));
  return compose(acc, tr.final_binding);
}

struct DecompPreconditionFailure {
  std::uint32_t first_bad_extension = 0;
  bool unifiable = false;  // true: unified but left the recursion var unbound
  UnifyResult outcome;
};

using DecompResult = std::variant<DecompTrace, DecompPreconditionFailure>;

namespace detail {

// Shared driver for both decomposition operators. The windowed variant
// carries only the x-window restriction downward; the full variant carries
// all of sh(sigma·theta). Both store the same per-step data.
//
// Callers must have established that extensions 0..k are extendably
// unifiable; violations surface as logic errors, not user-facing failures.
inline DecompTrace run_orbit(const SemiloopSpec& sl, std::uint32_t k,
                             bool windowed, std::size_t node_budget) {
  DecompTrace tr;
  tr.k = k;
  const VarKey rec = sl.recvar_key();
  const std::set<VarKey> window = sl.window();
  Substitution sigma;
  Term target = sl.fixed();
  Term last_unshifted = sl.fixed();
  for (std::uint32_t pos = 1; pos <= k; ++pos) {
    // The carried substitution lives in the shifted x-range and in already
    // consumed y-variables, so it can never touch the current target.
    if (!equal(sigma.apply(target), target))
      throw std::logic_error(
          "carried substitution touches the decomposition target");
    UnifyResult r = unify(sigma.apply(sl.extendable()), target, node_budget);
    if (!r.unifiable())
      throw std::logic_error("decomposition step at depth " +
                             std::to_string(k - pos + 1) +
                             " failed to unify; preconditions do not hold");
    const Term* bound = r.mgu.lookup(rec);
    if (!bound)
      throw std::logic_error("decomposition step at depth " +
                             std::to_string(k - pos + 1) +
                             " left the recursion variable unbound");
    DecompStep st;
    st.depth = k - pos + 1;
    st.shift_amount = st.depth - 1;
    st.theta = r.mgu;
    st.theta.erase(rec);
    st.t_prime = *bound;
    st.residual_target = shift_x(*bound);
    Substitution carried = shift_x(compose(sigma, st.theta));
    st.sigma_delta = carried.restricted_to(window);
    last_unshifted = *bound;
    target = st.residual_target;
    sigma = windowed ? st.sigma_delta : carried;
    tr.steps.push_back(std::move(st));
  }
  tr.final_binding.bind(rec, last_unshifted);
  return tr;
}

}  // namespace detail

// Decomposability check: extensions 0..k must all be extendably unifiable.
inline std::optional<DecompPreconditionFailure> check_decomposable(
    const SemiloopSpec& sl, std::uint32_t k,
    std::size_t node_budget = kDefaultNodeBudget) {
  ExtensionBuilder b(sl, node_budget);
  for (std::uint32_t j = 0; j <= k; ++j) {
    ExtendablyUnifiableReport rep = unify_extension(b, j);
    if (!rep.extendably) {
      DecompPreconditionFailure f;
      f.first_bad_extension = j;
      f.unifiable = rep.unifiable;
      f.outcome = rep.outcome;
      return f;
    }
  }
  return std::nullopt;
}

inline DecompResult decompose_D(const SemiloopSpec& sl, std::uint32_t k,
                                std::size_t node_budget = kDefaultNodeBudget) {
  if (auto bad = check_decomposable(sl, k, node_budget)) return *bad;
  return detail::run_orbit(sl, k, false, node_budget);
}

inline DecompResult decompose_Dprime(
    const SemiloopSpec& sl, std::uint32_t k,
    std::size_t node_budget = kDefaultNodeBudget) {
  if (auto bad = check_decomposable(sl, k, node_budget)) return *bad;
  return detail::run_orbit(sl, k, true, node_budget);
}

// A repeat of the stored (residual target, window substitution) pair at two
// depths of a trace. r is the extension index the trace certifies (trace.k-1).
struct Cycle {
  std::uint32_t r = 0;
  std::uint32_t i = 0;
  std::uint32_t j = 0;  // j < i
  Term recurring_target;
  Substitution recurring_sigma;
};

enum class CycleScanOutcome { NotApplicable, NoCycle, Found };

struct CycleScan {
  CycleScanOutcome outcome = CycleScanOutcome::NoCycle;
  std::optional<Cycle> cycle;
};

// Scans a trace of depth r+1 for a repeated step state. Applicable only when
// r exceeds twice the index spread — below that the extension structure has
// not stabilized and a repeat licenses nothing. Scan order: smallest i, then
// smallest gap; first hit wins, keeping reports stable.
inline CycleScan detect_cycle(const DecompTrace& tr, std::uint32_t delta) {
  CycleScan scan;
  if (tr.k == 0 || tr.k - 1 <= 2 * delta) {
    scan.outcome = CycleScanOutcome::NotApplicable;
    return scan;
  }
  for (std::uint32_t i = 2; i <= tr.k; ++i) {
    for (std::uint32_t j = i - 1; j >= 1; --j) {
      const DecompStep& a = step_at_depth(tr, i);
      const DecompStep& b = step_at_depth(tr, j);
      if (equal(a.residual_target, b.residual_target) &&
          a.sigma_delta == b.sigma_delta) {
        scan.outcome = CycleScanOutcome::Found;
        scan.cycle =
            Cycle{tr.k - 1, i, j, a.residual_target, a.sigma_delta};
        return scan;
      }
    }
  }
  scan.outcome = CycleScanOutcome::NoCycle;
  return scan;
}

// Composition of the shifted step unifiers at depths i down to j. Depth 0
// contributes nothing here (only the closing binding of sub_segment).
inline Substitution segment(const DecompTrace& tr, std::uint32_t i,
                            std::uint32_t j) {
  if (j > i || i > tr.k)
    throw std::out_of_range("segment range [" + std::to_string(i) + ".." +
                            std::to_string(j) + "] outside trace of depth " +
                            std::to_string(tr.k));
  if (i == 0) return Substitution::identity();
  if (j == 0) j = 1;
  Substitution acc;
  for (std::uint32_t d = i; d >= j; --d) {
    const DecompStep& st = step_at_depth(tr, d);
    acc = compose(acc, shift_x(st.theta, st.shift_amount));
  }
  return acc;
}

// As segment, but closed with the recursion-variable binding of the step at
// the closing depth (the trace's final binding when j = 0).
inline Substitution sub_segment(const DecompTrace& tr, std::uint32_t i,
                                std::uint32_t j) {
  Substitution acc = segment(tr, i, j);
  Substitution close;
  if (j == 0) {
    close = tr.final_binding;
  } else {
    close.bind(tr.final_binding.begin()->first, step_at_depth(tr, j).t_prime);
  }
  return compose(acc, close);
}

// A found cycle makes the sequence of step states periodic from its first
// occurrence on, so step unifiers beyond the trace can be read from the
// cycle. The unifier of the k-extension is the composition of per-position
// unifiers sh^(k-c)(theta_c) for c = 1..k, closed with the recursion-variable
// binding at position k, positions past the trace folded into the cycle.
inline Substitution build_unifier_from_cycle(const DecompTrace& tr,
                                             const Cycle& cyc,
                                             std::uint32_t k) {
  if (cyc.j < 1 || cyc.j >= cyc.i || cyc.i > tr.k)
    throw std::invalid_argument("cycle does not fit the trace");
  if (k + 1 < tr.k)
    throw std::invalid_argument(
        "reconstruction needs k at least trace depth minus one");
  const std::uint32_t period = cyc.i - cyc.j;
  const std::uint32_t first = tr.k + 1 - cyc.i;
  auto step_for = [&](std::uint32_t c) -> const DecompStep& {
    if (c > tr.k) c = first + 1 + (c - first - 1) % period;
    return tr.steps[c - 1];
  };
  Substitution acc;
  for (std::uint32_t c = 1; c <= k; ++c)
    acc = compose(acc, shift_x(step_for(c).theta, k - c));
  Substitution close;
  close.bind(tr.final_binding.begin()->first, step_for(k).t_prime);
  return compose(acc, close).normalized();
}

// Finite-unifiability condition on the k-extension's unifier: the recursion
// variable is unbound, and every variable whose binding still carries it sits
// outside the extendable term's index range — class x strictly above by one
// after shifting, class y strictly above. The range covers the term both raw
// and with the shifted unifier applied: the raw indices are what each later
// lifting step substitutes into, and the applied ones are what the current
// unifier exposes. (Bounding against the applied term alone is unsound: a
// unifier that collapses the term's own variables into recursion-variable
// terms erases their indices from the applied form, so a carrier sitting
// inside the term would slip past the check and the next extension can fail
// an occurs check.) A class absent from both forms imposes no bound. Holding
// at k licenses "every extension from k on is unifiable".
inline bool check_finite_condition(const SemiloopSpec& sl, std::uint32_t k,
                                   const Substitution& mgu) {
  if (k == 0)
    throw std::invalid_argument(
        "the finite condition applies to extensions k >= 1");
  if (mgu.contains(sl.recvar_key())) return false;
  const VarKey rec = sl.recvar_key();
  Term s_applied = shift_x(mgu).apply(sl.extendable());
  std::uint32_t max_x = 0, max_y = 0, raw_x = 0, raw_y = 0;
  bool has_x = max_class_index(s_applied, ClassId::X, max_x);
  bool has_y = max_class_index(s_applied, ClassId::Y, max_y);
  if (max_class_index(sl.extendable(), ClassId::X, raw_x)) {
    max_x = has_x ? std::max(max_x, raw_x) : raw_x;
    has_x = true;
  }
  if (max_class_index(sl.extendable(), ClassId::Y, raw_y)) {
    max_y = has_y ? std::max(max_y, raw_y) : raw_y;
    has_y = true;
  }
  for (const auto& [z, r] : mgu) {
    if (z.is_rec || !occurs(rec, r)) continue;
    if (z.cls == ClassId::X) {
      if (has_x && z.index + 1 <= max_x) return false;
    } else {
      if (has_y && z.index <= max_y) return false;
    }
  }
  return true;
}

inline void write_trace(std::ostream& os, const DecompTrace& tr) {
  for (const auto& st : tr.steps) {
    os << "step depth=" << st.depth << " shift=" << st.shift_amount
       << " theta=" << st.theta.to_string()
       << " target=" << to_string(st.residual_target)
       << " sigma_delta=" << st.sigma_delta.to_string() << "\n";
  }
  os << "final " << tr.final_binding.to_string() << "\n";
}

}  // namespace loopunif
