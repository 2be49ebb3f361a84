#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopunif/term.hpp"

namespace loopunif {

namespace detail {

inline Term shift_term_memo(const Term& t, const std::set<ClassId>& classes,
                            std::uint32_t amount,
                            std::map<const Node*, Term>& memo) {
  switch (t->kind) {
    case Kind::ClassVar:
      if (classes.count(t->cls)) return class_var(t->cls, t->index + amount);
      return t;
    case Kind::RecVar:
      return t;
    case Kind::App: {
      auto it = memo.find(t.get());
      if (it != memo.end()) return it->second;
      std::vector<Term> args;
      args.reserve(t->args.size());
      bool changed = false;
      for (const auto& a : t->args) {
        Term b = shift_term_memo(a, classes, amount, memo);
        changed |= (b.get() != a.get());
        args.push_back(std::move(b));
      }
      Term out = changed ? app(t->name, std::move(args)) : t;
      memo.emplace(t.get(), out);
      return out;
    }
  }
  return t;
}

inline Term extend_term_memo(const Term& t, const std::string& name,
                             const Term& body,
                             std::map<const Node*, Term>& memo) {
  switch (t->kind) {
    case Kind::ClassVar:
      return t;
    case Kind::RecVar:
      return t->name == name ? body : t;
    case Kind::App: {
      auto it = memo.find(t.get());
      if (it != memo.end()) return it->second;
      std::vector<Term> args;
      args.reserve(t->args.size());
      bool changed = false;
      for (const auto& a : t->args) {
        Term b = extend_term_memo(a, name, body, memo);
        changed |= (b.get() != a.get());
        args.push_back(std::move(b));
      }
      Term out = changed ? app(t->name, std::move(args)) : t;
      memo.emplace(t.get(), out);
      return out;
    }
  }
  return t;
}

}  // namespace detail

// Shift: bump the index of every class variable whose class is in `classes`.
// Results are cached per input node so shared subterms stay shared.
inline Term shift_term(const Term& t, const std::set<ClassId>& classes,
                       std::uint32_t amount = 1) {
  if (amount == 0) return t;
  std::map<const Node*, Term> memo;
  return detail::shift_term_memo(t, classes, amount, memo);
}

// Extension: replace every occurrence of the recursion variable #name by body.
// Cached per input node, like shift_term.
inline Term extend_term(const Term& t, const std::string& name,
                        const Term& body) {
  std::map<const Node*, Term> memo;
  return detail::extend_term_memo(t, name, body, memo);
}

// A substitution is a finite map from variables to terms. Application is
// simultaneous (one pass, no re-application to introduced terms). Identity
// bindings are never stored.
class Substitution {
 public:
  Substitution() = default;

  Substitution(std::initializer_list<std::pair<Term, Term>> bindings) {
    for (const auto& [v, t] : bindings) bind(VarKey::of(v), t);
  }

  static Substitution identity() { return {}; }

  void bind(const VarKey& v, const Term& t) {
    if (!v.is_rec && t->kind == Kind::ClassVar && t->cls == v.cls &&
        t->index == v.index)
      return;
    if (v.is_rec && t->kind == Kind::RecVar && t->name == v.name) return;
    map_[v] = t;
  }

  void erase(const VarKey& v) { map_.erase(v); }

  bool contains(const VarKey& v) const { return map_.count(v) != 0; }

  const Term* lookup(const VarKey& v) const {
    auto it = map_.find(v);
    return it == map_.end() ? nullptr : &it->second;
  }

  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }

  std::set<VarKey> domain() const {
    std::set<VarKey> d;
    for (const auto& [v, t] : map_) d.insert(v);
    return d;
  }

  auto begin() const { return map_.begin(); }
  auto end() const { return map_.end(); }

  Term apply(const Term& t) const {
    if (map_.empty()) return t;
    // Bindings repeated in t (or shared within it) must come out as shared
    // nodes, not fresh copies: results are cached per input node so the
    // walk is linear in distinct nodes even when t is a heavily shared DAG.
    std::map<const Node*, Term> memo;
    return apply_memo(t, memo);
  }

  // Composition: t.apply(compose(s, u)) == u.apply(s.apply(t)) for all t.
  friend Substitution compose(const Substitution& s, const Substitution& u) {
    Substitution out;
    for (const auto& [v, t] : s.map_) out.bind(v, u.apply(t));
    for (const auto& [v, t] : u.map_)
      if (!s.contains(v)) out.bind(v, t);
    return out;
  }

  friend Substitution shift_subst(const Substitution& s,
                                  const std::set<ClassId>& classes,
                                  std::uint32_t amount = 1) {
    Substitution out;
    for (const auto& [v, t] : s.map_) {
      VarKey w = v;
      if (!w.is_rec && classes.count(w.cls)) w.index += amount;
      out.bind(w, shift_term(t, classes, amount));
    }
    return out;
  }

  Substitution restricted_to(const std::set<VarKey>& keep) const {
    Substitution out;
    for (const auto& [v, t] : map_)
      if (keep.count(v)) out.bind(v, t);
    return out;
  }

  Substitution without(const std::set<VarKey>& drop) const {
    Substitution out;
    for (const auto& [v, t] : map_)
      if (!drop.count(v)) out.bind(v, t);
    return out;
  }

  // Resolve internal references: repeatedly apply the map to its own ranges
  // until a fixpoint. Turns a triangular map into the equivalent idempotent
  // one. Throws if the map is cyclic (no fixpoint exists).
  Substitution normalized() const {
    Substitution cur = *this;
    for (std::size_t round = 0; round <= map_.size() + 4; ++round) {
      bool changed = false;
      Substitution next;
      for (const auto& [v, t] : cur.map_) {
        Term r = cur.apply(t);
        changed |= !equal(r, t);
        next.bind(v, r);
      }
      if (!changed) return cur;
      cur = std::move(next);
    }
    throw std::invalid_argument("substitution has no fixpoint (cyclic)");
  }

  bool is_idempotent() const {
    for (const auto& [v, t] : map_)
      if (!equal(apply(t), t)) return false;
    return true;
  }

  friend bool operator==(const Substitution& a, const Substitution& b) {
    if (a.map_.size() != b.map_.size()) return false;
    auto ia = a.map_.begin();
    auto ib = b.map_.begin();
    for (; ia != a.map_.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return false;
      if (!equal(ia->second, ib->second)) return false;
    }
    return true;
  }
  friend bool operator!=(const Substitution& a, const Substitution& b) {
    return !(a == b);
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (const auto& [v, t] : map_) {
      if (!first) os << ", ";
      first = false;
      os << v.to_string() << " -> ";
      write_term(os, t);
    }
    os << '}';
    return os.str();
  }

 private:
  Term apply_memo(const Term& t, std::map<const Node*, Term>& memo) const {
    switch (t->kind) {
      case Kind::ClassVar:
      case Kind::RecVar: {
        const Term* b = lookup(VarKey::of(t));
        return b ? *b : t;
      }
      case Kind::App: {
        auto it = memo.find(t.get());
        if (it != memo.end()) return it->second;
        std::vector<Term> args;
        args.reserve(t->args.size());
        bool changed = false;
        for (const auto& a : t->args) {
          Term b = apply_memo(a, memo);
          changed |= (b.get() != a.get());
          args.push_back(std::move(b));
        }
        Term out = changed ? app(t->name, std::move(args)) : t;
        memo.emplace(t.get(), out);
        return out;
      }
    }
    return t;
  }

  std::map<VarKey, Term> map_;
};

inline bool is_unifier(const Term& s, const Term& t, const Substitution& sub) {
  return equal(sub.apply(s), sub.apply(t));
}

}  // namespace loopunif
