#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopunif/subst.hpp"
#include "loopunif/term.hpp"
#include "loopunif/unify.hpp"

namespace loopunif {

// The extendable side of a semiloop lives in class x; only that class is
// ever shifted.
inline Term shift_x(const Term& t, std::uint32_t amount = 1) {
  return shift_term(t, {ClassId::X}, amount);
}

inline Substitution shift_x(const Substitution& s, std::uint32_t amount = 1) {
  return shift_subst(s, {ClassId::X}, amount);
}

// A semiloop pairs an extendable term s — class-x variables plus at most one
// recursion variable — with a fixed term t over class-y variables. Extension
// n is obtained from extension n-1 by shifting over class x and replacing the
// recursion variable by s again; the fixed side never changes.
//
// A recursion-variable-free s is accepted as the degenerate case: every
// extension from 1 on is s itself (a synthetic recursion variable "a" stands
// in for extension 0).
class SemiloopSpec {
 public:
  static SemiloopSpec make(const Term& extendable, const Term& fixed) {
    SemiloopSpec sl;
    sl.s_ = extendable;
    sl.t_ = fixed;
    bool found_index = false;
    std::uint32_t lo = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t hi = 0;
    for (const auto& v : vars(extendable)) {
      if (v.is_rec) {
        if (!sl.recvar_.empty() && sl.recvar_ != v.name)
          throw std::invalid_argument(
              "extendable term uses recursion variables #" + sl.recvar_ +
              " and #" + v.name + "; at most one is allowed");
        sl.recvar_ = v.name;
      } else {
        if (v.cls != ClassId::X)
          throw std::invalid_argument(
              "extendable term must draw its variables from class x; found " +
              v.to_string());
        lo = std::min(lo, v.index);
        hi = std::max(hi, v.index);
        found_index = true;
      }
    }
    for (const auto& v : vars(fixed)) {
      if (v.is_rec)
        throw std::invalid_argument(
            "fixed term may not contain recursion variables; found " +
            v.to_string());
      if (v.cls != ClassId::Y)
        throw std::invalid_argument(
            "fixed term must draw its variables from class y; found " +
            v.to_string());
    }
    if (sl.recvar_.empty()) {
      sl.degenerate_ = true;
      sl.recvar_ = "a";
    }
    sl.has_class_vars_ = found_index;
    if (found_index) {
      sl.min_index_ = lo;
      sl.delta_ = hi - lo;
    }
    sl.sig_.note_term(extendable);
    sl.sig_.note_term(fixed);
    return sl;
  }

  const Term& extendable() const { return s_; }
  const Term& fixed() const { return t_; }
  const std::string& recvar() const { return recvar_; }

  VarKey recvar_key() const {
    VarKey k;
    k.is_rec = true;
    k.name = recvar_;
    return k;
  }

  // True when the extendable term contains no recursion variable.
  bool degenerate() const { return degenerate_; }

  bool has_class_vars() const { return has_class_vars_; }

  // Smallest class-variable index in the extendable term.
  std::uint32_t min_index() const {
    require_class_vars();
    return min_index_;
  }

  // Index spread (max - min) of the extendable term's class variables.
  std::uint32_t delta() const {
    require_class_vars();
    return delta_;
  }

  std::uint32_t delta_or_zero() const { return has_class_vars_ ? delta_ : 0; }

  // The window {x_m, ..., x_{m+delta}}; empty when s has no class variables.
  std::set<VarKey> window() const {
    std::set<VarKey> w;
    if (!has_class_vars_) return w;
    for (std::uint32_t i = min_index_; i <= min_index_ + delta_; ++i)
      w.insert(VarKey::of(xvar(i)));
    return w;
  }

  const Signature& signature() const { return sig_; }

 private:
  void require_class_vars() const {
    if (!has_class_vars_)
      throw std::domain_error(
          "extendable term has no class variables; its index spread is "
          "undefined");
  }

  Term s_;
  Term t_;
  std::string recvar_;
  bool degenerate_ = false;
  bool has_class_vars_ = false;
  std::uint32_t min_index_ = 0;
  std::uint32_t delta_ = 0;
  Signature sig_;
};

struct Extension {
  std::uint32_t n = 0;
  Term term;   // the n-extended extendable side
  Term fixed;  // unchanged fixed side
};

// Memoizes s_0..s_n so classification loops probing consecutive n pay for
// each extension once. Not thread-safe; use per-thread instances.
class ExtensionBuilder {
 public:
  explicit ExtensionBuilder(SemiloopSpec sl,
                            std::size_t node_budget = kDefaultNodeBudget)
      : sl_(std::move(sl)), budget_(node_budget) {
    cache_.push_back(rec_var(sl_.recvar()));
    sizes_.push_back(1);
  }

  const SemiloopSpec& spec() const { return sl_; }
  std::size_t node_budget() const { return budget_; }

  Extension extension(std::uint32_t n) {
    while (cache_.size() <= n) {
      Term next;
      std::size_t next_size;
      if (sl_.degenerate()) {
        next = sl_.extendable();
        next_size = term_size(next);
      } else {
        // Each occurrence of the recursion variable (one node) becomes s.
        const Term& prev = cache_.back();
        std::size_t occurrences =
            positions_of(prev, rec_var(sl_.recvar())).size();
        next_size =
            sizes_.back() + occurrences * (term_size(sl_.extendable()) - 1);
        if (next_size > budget_)
          throw ResourceLimit("extension " + std::to_string(cache_.size()) +
                              " needs " + std::to_string(next_size) +
                              " nodes, over the budget of " +
                              std::to_string(budget_));
        next = extend_term(shift_x(prev), sl_.recvar(), sl_.extendable());
      }
      cache_.push_back(std::move(next));
      sizes_.push_back(next_size);
    }
    return Extension{n, cache_[n], sl_.fixed()};
  }

 private:
  SemiloopSpec sl_;
  std::size_t budget_;
  std::vector<Term> cache_;
  std::vector<std::size_t> sizes_;
};

inline Extension extension(const SemiloopSpec& sl, std::uint32_t n,
                           std::size_t node_budget = kDefaultNodeBudget) {
  ExtensionBuilder b(sl, node_budget);
  return b.extension(n);
}

struct ExtendablyUnifiableReport {
  bool unifiable = false;
  bool extendably = false;  // implies unifiable and a recursion-var binding
  std::optional<Substitution> mgu;
  std::optional<Term> recvar_binding;
  UnifyResult outcome;  // full engine outcome, including failure witnesses
};

inline ExtendablyUnifiableReport unify_extension(ExtensionBuilder& b,
                                                 std::uint32_t n) {
  Extension e = b.extension(n);
  ExtendablyUnifiableReport rep;
  rep.outcome = unify(e.term, e.fixed, b.node_budget());
  rep.unifiable = rep.outcome.unifiable();
  if (rep.unifiable) {
    rep.mgu = rep.outcome.mgu;
    if (const Term* bound = rep.outcome.mgu.lookup(b.spec().recvar_key())) {
      rep.extendably = true;
      rep.recvar_binding = *bound;
    }
  }
  return rep;
}

inline ExtendablyUnifiableReport unify_extension(
    const SemiloopSpec& sl, std::uint32_t n,
    std::size_t node_budget = kDefaultNodeBudget) {
  ExtensionBuilder b(sl, node_budget);
  return unify_extension(b, n);
}

// Reports for n = 1..bound in order, stopping after the first extension that
// fails to unify (that report is included).
inline std::vector<ExtendablyUnifiableReport> is_loop_unifiable_up_to(
    const SemiloopSpec& sl, std::uint32_t bound,
    std::size_t node_budget = kDefaultNodeBudget) {
  if (bound < 1) throw std::invalid_argument("bound must be at least 1");
  ExtensionBuilder b(sl, node_budget);
  std::vector<ExtendablyUnifiableReport> out;
  for (std::uint32_t n = 1; n <= bound; ++n) {
    out.push_back(unify_extension(b, n));
    if (!out.back().unifiable) break;
  }
  return out;
}

// One-step lifts of an extension unifier. When sigma leaves the recursion
// variable unbound and no variable whose binding carries it occurs in the
// extendable term itself, replacing the recursion variable inside every
// binding by apply(s, sigma) yields a unifier of the in-place extension
// extend(s_k, #a, s) =? t. The shifted variant does the same after an x-shift
// and yields a unifier of the true (k+1)-extension. Returns nothing when the
// side conditions fail.
//
// The carrier check must read the raw term, not apply(s, sigma): a sigma
// that collapses the term's own variables into recursion-variable terms
// erases them from the applied form, and the lift it licenses is not a
// unifier (the in-place extension need not be unifiable at all then).
inline std::optional<Substitution> lift_unifier(const SemiloopSpec& sl,
                                                const Substitution& sigma) {
  VarKey rec = sl.recvar_key();
  if (sigma.contains(rec)) return std::nullopt;
  std::set<VarKey> s_vars = vars(sl.extendable());
  for (const auto& [z, r] : sigma)
    if (occurs(rec, r) && s_vars.count(z)) return std::nullopt;
  Term body = sigma.apply(sl.extendable());
  Substitution out;
  for (const auto& [z, r] : sigma)
    out.bind(z, extend_term(r, sl.recvar(), body));
  return out;
}

inline std::optional<Substitution> lift_unifier_shifted(
    const SemiloopSpec& sl, const Substitution& sigma) {
  if (sigma.contains(sl.recvar_key())) return std::nullopt;
  return lift_unifier(sl, shift_x(sigma));
}

// Two-sided loop stepping, far enough to exercise the symmetry of the
// extension rule: each side shifts over its own class and regrows its own
// recursion variable. No classification is defined for these.
struct LoopSpec {
  Term left;
  Term right;
  std::string left_rec;
  std::string right_rec;
};

struct LoopPair {
  Term left;
  Term right;
};

inline LoopPair loop_extension(const LoopSpec& spec, std::uint32_t n) {
  LoopPair p{rec_var(spec.left_rec), rec_var(spec.right_rec)};
  for (std::uint32_t i = 0; i < n; ++i) {
    p.left = extend_term(shift_term(p.left, {ClassId::X}), spec.left_rec,
                         spec.left);
    p.right = extend_term(shift_term(p.right, {ClassId::Y}), spec.right_rec,
                          spec.right);
  }
  return p;
}

}  // namespace loopunif
