#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "loopunif/semiloop.hpp"
#include "loopunif/subst.hpp"
#include "loopunif/term.hpp"
#include "loopunif/unify.hpp"

// Independent ground truth for the main engine. Everything in this header is
// written for obviousness rather than speed — plain recursion, no sharing, no
// memoization — so that a bug would have to be invented twice to go unseen.

namespace loopunif {

inline bool verify_unifier(const Term& s, const Term& t,
                           const Substitution& sub) {
  return equal(sub.apply(s), sub.apply(t));
}

namespace oracle_detail {

class RobinsonUnifier {
 public:
  explicit RobinsonUnifier(std::size_t node_budget) : budget_(node_budget) {}

  UnifyResult run(const Term& s, const Term& t) {
    UnifyResult r;
    if (solve(s, t)) {
      r.status = UnifyStatus::Unifiable;
      for (const auto& [v, b] : bind_) r.mgu.bind(v, resolve(b));
    } else {
      r.status = status_;
      r.clash = clash_;
      r.occurs = occurs_;
    }
    return r;
  }

 private:
  // Resolve a variable through the bindings to its representative.
  Term walk(Term t) const {
    while (is_var(t)) {
      auto it = bind_.find(VarKey::of(t));
      if (it == bind_.end()) return t;
      t = it->second;
    }
    return t;
  }

  bool occurs_through(const VarKey& v, const Term& t) {
    spend(1);
    Term w = walk(t);
    if (is_var(w)) return VarKey::of(w) == v;
    for (const auto& a : w->args)
      if (occurs_through(v, a)) return true;
    return false;
  }

  // The documented pair orientation, restated from scratch: between two
  // variables, a class variable is bound rather than a recursion variable;
  // between class variables the lexicographically larger (class, index) is
  // bound (x before y); between recursion variables the larger name.
  static bool bind_first(const Term& a, const Term& b) {
    const bool a_cls = a->kind == Kind::ClassVar;
    const bool b_cls = b->kind == Kind::ClassVar;
    if (a_cls != b_cls) return a_cls;
    if (a_cls)
      return std::make_pair(a->cls, a->index) >
             std::make_pair(b->cls, b->index);
    return a->name > b->name;
  }

  bool solve(Term a, Term b) {
    spend(1);
    a = walk(a);
    b = walk(b);
    if (is_var(a) && is_var(b)) {
      if (VarKey::of(a) == VarKey::of(b)) return true;
      if (!bind_first(a, b)) std::swap(a, b);
      bind_[VarKey::of(a)] = b;
      return true;
    }
    if (!is_var(a) && !is_var(b)) {
      if (a->name != b->name || a->args.size() != b->args.size()) {
        status_ = UnifyStatus::Clash;
        clash_ = ClashInfo{0, a->name, b->name};
        return false;
      }
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!solve(a->args[i], b->args[i])) return false;
      return true;
    }
    if (!is_var(a)) std::swap(a, b);
    if (occurs_through(VarKey::of(a), b)) {
      status_ = UnifyStatus::OccursCheck;
      occurs_ = OccursInfo{VarKey::of(a), resolve(b)};
      return false;
    }
    bind_[VarKey::of(a)] = b;
    return true;
  }

  Term resolve(const Term& t) {
    spend(1);
    Term w = walk(t);
    if (is_var(w)) return w;
    std::vector<Term> args;
    args.reserve(w->args.size());
    for (const auto& a : w->args) args.push_back(resolve(a));
    return app(w->name, std::move(args));
  }

  void spend(std::size_t n) {
    spent_ += n;
    if (spent_ > budget_)
      throw ResourceLimit("reference unifier exceeded its work budget of " +
                          std::to_string(budget_));
  }

  std::map<VarKey, Term> bind_;
  UnifyStatus status_ = UnifyStatus::Unifiable;
  std::optional<ClashInfo> clash_;
  std::optional<OccursInfo> occurs_;
  std::size_t budget_;
  std::size_t spent_ = 0;
};

}  // namespace oracle_detail

inline UnifyResult oracle_unify(const Term& s, const Term& t,
                                std::size_t node_budget = kDefaultNodeBudget) {
  return oracle_detail::RobinsonUnifier(node_budget).run(s, t);
}

// The n-extension by the other route: shift the base term n-1 times, then
// plug the (n-1)-extension into its recursion variable.
inline Term oracle_extension(const SemiloopSpec& sl, std::uint32_t n) {
  if (n == 0) return rec_var(sl.recvar());
  if (sl.degenerate()) return sl.extendable();
  Term prev = oracle_extension(sl, n - 1);
  return extend_term(shift_x(sl.extendable(), n - 1), sl.recvar(), prev);
}

inline UnifyResult oracle_unify_extension(
    const SemiloopSpec& sl, std::uint32_t n,
    std::size_t node_budget = kDefaultNodeBudget) {
  return oracle_unify(oracle_extension(sl, n), sl.fixed(), node_budget);
}

}  // namespace loopunif
