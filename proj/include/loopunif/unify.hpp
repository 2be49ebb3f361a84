#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopunif/subst.hpp"
#include "loopunif/term.hpp"

namespace loopunif {

inline constexpr std::size_t kDefaultNodeBudget = 1'000'000;

enum class UnifyStatus { Unifiable, Clash, OccursCheck };

inline const char* to_string(UnifyStatus s) {
  switch (s) {
    case UnifyStatus::Unifiable: return "unifiable";
    case UnifyStatus::Clash: return "clash";
    case UnifyStatus::OccursCheck: return "occurs-check";
  }
  return "?";
}

struct ClashInfo {
  std::size_t pair_index;
  std::string left_symbol;
  std::string right_symbol;
};

struct OccursInfo {
  VarKey variable;
  Term term;
};

struct UnifyResult {
  UnifyStatus status = UnifyStatus::Unifiable;
  Substitution mgu;                          // meaningful iff Unifiable
  std::vector<std::pair<Term, Term>> pairs;  // final problem state
  std::optional<ClashInfo> clash;
  std::optional<OccursInfo> occurs;

  bool unifiable() const { return status == UnifyStatus::Unifiable; }
};

namespace detail {

// The pair to be solved is kept oriented with the variable to be bound on
// the left. Returns true when (u, v) is the wrong way round:
//   application ≟ variable        -> variable left
//   recursion var ≟ class var     -> class var left (a recursion variable
//                                    never binds to a class variable)
//   class var ≟ class var         -> larger (class, index) left, x < y
//   recursion var ≟ recursion var -> larger name left
inline bool must_swap(const Term& u, const Term& v) {
  const bool uv = is_var(u), vv = is_var(v);
  if (!uv) return vv;
  if (!vv) return false;
  const bool ur = u->kind == Kind::RecVar, vr = v->kind == Kind::RecVar;
  if (ur != vr) return ur;
  if (ur) return u->name < v->name;
  return std::make_pair(u->cls, u->index) < std::make_pair(v->cls, v->index);
}

inline bool is_clash_pair(const Term& u, const Term& v) {
  return u->kind == Kind::App && v->kind == Kind::App &&
         (u->name != v->name || u->args.size() != v->args.size());
}

}  // namespace detail

// Deterministic first-order unification over an ordered pair list.
//
// Pass 1 rescans from the front after every mutation: equal pairs are
// deleted, applications with matching head and arity are decomposed in
// place, pairs are oriented, and a variable facing an application that
// contains it halts the run immediately (the offending pair is preserved
// verbatim in `pairs`). Head mismatches are left in place as inert clash
// pairs. Once pass 1 is quiescent, pass 2 eliminates the leftmost solved
// pair whose variable still occurs in another pair, substituting into all
// other pairs, and control returns to pass 1. At the overall fixpoint any
// remaining clash pair decides the result; otherwise the pair list is a
// solved form and the unifier is read off directly.
inline UnifyResult unify(const Term& s, const Term& t,
                         std::size_t node_budget = kDefaultNodeBudget) {
  std::vector<std::pair<Term, Term>> pairs{{s, t}};

  for (;;) {
    bool mutated = true;
    while (mutated) {
      mutated = false;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        Term& u = pairs[i].first;
        Term& v = pairs[i].second;
        if (equal(u, v)) {
          pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(i));
          mutated = true;
          break;
        }
        if (u->kind == Kind::App && v->kind == Kind::App) {
          if (u->name != v->name || u->args.size() != v->args.size())
            continue;  // inert clash pair
          std::vector<std::pair<Term, Term>> sub;
          sub.reserve(u->args.size());
          for (std::size_t j = 0; j < u->args.size(); ++j)
            sub.emplace_back(u->args[j], v->args[j]);
          pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(i));
          pairs.insert(pairs.begin() + static_cast<std::ptrdiff_t>(i),
                       sub.begin(), sub.end());
          mutated = true;
          break;
        }
        if (detail::must_swap(u, v)) {
          std::swap(u, v);
          mutated = true;
          break;
        }
        if (is_var(u) && v->kind == Kind::App && occurs(VarKey::of(u), v)) {
          UnifyResult r;
          r.status = UnifyStatus::OccursCheck;
          r.occurs = OccursInfo{VarKey::of(u), v};
          r.pairs = std::move(pairs);
          return r;
        }
      }
    }

    bool eliminated = false;
    for (std::size_t i = 0; i < pairs.size() && !eliminated; ++i) {
      const Term& u = pairs[i].first;
      const Term& v = pairs[i].second;
      if (!is_var(u)) continue;
      VarKey z = VarKey::of(u);
      if (occurs(z, v)) continue;
      bool elsewhere = false;
      for (std::size_t j = 0; j < pairs.size() && !elsewhere; ++j)
        if (j != i)
          elsewhere = occurs(z, pairs[j].first) || occurs(z, pairs[j].second);
      if (!elsewhere) continue;
      Substitution one;
      one.bind(z, v);
      // Budget the physical size of the pair set: shared subterms count once,
      // so solved forms whose logical unfolding is exponential stay cheap.
      std::set<const Node*> seen;
      std::size_t total = 0;
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (j != i) {
          pairs[j].first = one.apply(pairs[j].first);
          pairs[j].second = one.apply(pairs[j].second);
        }
        total += dag_size_into(pairs[j].first, seen) +
                 dag_size_into(pairs[j].second, seen);
      }
      if (total > node_budget)
        throw ResourceLimit("unification exceeded node budget of " +
                            std::to_string(node_budget));
      eliminated = true;
    }
    if (!eliminated) break;
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Term& u = pairs[i].first;
    const Term& v = pairs[i].second;
    if (detail::is_clash_pair(u, v)) {
      UnifyResult r;
      r.status = UnifyStatus::Clash;
      r.clash = ClashInfo{i, u->name, v->name};
      r.pairs = std::move(pairs);
      return r;
    }
  }

  UnifyResult r;
  r.status = UnifyStatus::Unifiable;
  for (const auto& [u, v] : pairs) r.mgu.bind(VarKey::of(u), v);
  r.pairs = std::move(pairs);
  if (!is_unifier(s, t, r.mgu) || !r.mgu.is_idempotent())
    throw std::logic_error("unify produced an unsound result for " +
                           to_string(s) + " =? " + to_string(t));
  return r;
}

}  // namespace loopunif
