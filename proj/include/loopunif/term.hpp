#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace loopunif {

// Terms are built from two indexed classes of first-order variables (x_i, y_i),
// named recursion variables (#a), and applications of fixed-arity symbols.
// Nodes are immutable and shared; copying a Term is a pointer copy.

// Thrown when a computation would exceed its node budget.
class ResourceLimit : public std::runtime_error {
 public:
  explicit ResourceLimit(const std::string& what) : std::runtime_error(what) {}
};

enum class ClassId : std::uint8_t { X = 0, Y = 1 };

inline char class_letter(ClassId c) { return c == ClassId::X ? 'x' : 'y'; }

enum class Kind : std::uint8_t { ClassVar, RecVar, App };

struct Node;
using Term = std::shared_ptr<const Node>;

struct Node {
  Kind kind;
  ClassId cls = ClassId::X;   // ClassVar only
  std::uint32_t index = 0;    // ClassVar only
  std::string name;           // RecVar name or App symbol
  std::vector<Term> args;     // App only
};

inline Term class_var(ClassId c, std::uint32_t i) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::ClassVar;
  n->cls = c;
  n->index = i;
  return n;
}

inline Term xvar(std::uint32_t i) { return class_var(ClassId::X, i); }
inline Term yvar(std::uint32_t i) { return class_var(ClassId::Y, i); }

inline Term rec_var(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::RecVar;
  n->name = std::move(name);
  return n;
}

inline Term app(std::string symbol, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::App;
  n->name = std::move(symbol);
  n->args = std::move(args);
  return n;
}

inline Term constant(std::string symbol) { return app(std::move(symbol), {}); }

inline bool is_var(const Term& t) { return t->kind != Kind::App; }

namespace detail {

// Traversals below recurse plainly until this many application nodes have
// been visited, then start memoizing on node identity. Small terms pay
// nothing; terms with heavy internal sharing stay polynomial instead of
// walking their exponential logical unfolding.
inline constexpr std::size_t kSharedWalkFuel = 2048;

inline bool equal_rec(const Term& a, const Term& b, std::size_t& fuel,
                      std::set<std::pair<const Node*, const Node*>>& proven) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::ClassVar:
      return a->cls == b->cls && a->index == b->index;
    case Kind::RecVar:
      return a->name == b->name;
    case Kind::App: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      if (fuel > 0) {
        --fuel;
      } else if (proven.count({a.get(), b.get()})) {
        return true;
      }
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!equal_rec(a->args[i], b->args[i], fuel, proven)) return false;
      if (fuel == 0) proven.emplace(a.get(), b.get());
      return true;
    }
  }
  return false;
}

}  // namespace detail

inline bool equal(const Term& a, const Term& b) {
  std::size_t fuel = detail::kSharedWalkFuel;
  std::set<std::pair<const Node*, const Node*>> proven;
  return detail::equal_rec(a, b, fuel, proven);
}

// Identity of a variable, usable as an ordered map key. Class variables sort
// before recursion variables; class variables by (class, index) with x < y;
// recursion variables by name.
struct VarKey {
  bool is_rec = false;
  ClassId cls = ClassId::X;
  std::uint32_t index = 0;
  std::string name;

  static VarKey of(const Term& t) {
    VarKey k;
    if (t->kind == Kind::ClassVar) {
      k.is_rec = false;
      k.cls = t->cls;
      k.index = t->index;
    } else if (t->kind == Kind::RecVar) {
      k.is_rec = true;
      k.name = t->name;
    } else {
      throw std::logic_error("VarKey::of on non-variable");
    }
    return k;
  }

  Term to_term() const {
    return is_rec ? rec_var(name) : class_var(cls, index);
  }

  friend bool operator<(const VarKey& a, const VarKey& b) {
    return std::tie(a.is_rec, a.cls, a.index, a.name) <
           std::tie(b.is_rec, b.cls, b.index, b.name);
  }
  friend bool operator==(const VarKey& a, const VarKey& b) {
    return a.is_rec == b.is_rec && a.cls == b.cls && a.index == b.index &&
           a.name == b.name;
  }
  friend bool operator!=(const VarKey& a, const VarKey& b) { return !(a == b); }

  std::string to_string() const {
    if (is_rec) return "#" + name;
    return std::string(1, class_letter(cls)) + "_" + std::to_string(index);
  }
};

inline std::size_t term_size(const Term& t) {
  std::size_t n = 1;
  for (const auto& a : t->args) n += term_size(a);
  return n;
}

inline std::size_t term_depth(const Term& t) {
  std::size_t d = 0;
  for (const auto& a : t->args) d = std::max(d, term_depth(a));
  return d + 1;
}

// Number of distinct nodes reachable from t. Equals term_size for a tree;
// for a term with internal sharing it measures the physical footprint rather
// than the logical unfolding.
inline std::size_t dag_size_into(const Term& t, std::set<const Node*>& seen) {
  if (!seen.insert(t.get()).second) return 0;
  std::size_t n = 1;
  for (const auto& a : t->args) n += dag_size_into(a, seen);
  return n;
}

inline std::size_t dag_size(const Term& t) {
  std::set<const Node*> seen;
  return dag_size_into(t, seen);
}

namespace detail {

inline void collect_vars_rec(const Term& t, std::set<VarKey>& out,
                             std::size_t& fuel, std::set<const Node*>& seen) {
  if (t->kind != Kind::App) {
    out.insert(VarKey::of(t));
    return;
  }
  if (fuel > 0) {
    --fuel;
  } else if (!seen.insert(t.get()).second) {
    return;
  }
  for (const auto& a : t->args) collect_vars_rec(a, out, fuel, seen);
}

inline bool occurs_rec(const VarKey& v, const Term& t, std::size_t& fuel,
                       std::set<const Node*>& seen) {
  if (t->kind != Kind::App) return VarKey::of(t) == v;
  if (fuel > 0) {
    --fuel;
  } else if (!seen.insert(t.get()).second) {
    return false;
  }
  for (const auto& a : t->args)
    if (occurs_rec(v, a, fuel, seen)) return true;
  return false;
}

inline bool contains_rec_var_rec(const Term& t, std::size_t& fuel,
                                 std::set<const Node*>& seen) {
  if (t->kind == Kind::RecVar) return true;
  if (t->kind != Kind::App) return false;
  if (fuel > 0) {
    --fuel;
  } else if (!seen.insert(t.get()).second) {
    return false;
  }
  for (const auto& a : t->args)
    if (contains_rec_var_rec(a, fuel, seen)) return true;
  return false;
}

inline bool max_class_index_rec(const Term& t, ClassId c, std::uint32_t& out,
                                std::size_t& fuel,
                                std::set<const Node*>& seen) {
  if (t->kind == Kind::ClassVar) {
    if (t->cls != c) return false;
    out = std::max(out, t->index);
    return true;
  }
  if (t->kind != Kind::App) return false;
  if (fuel > 0) {
    --fuel;
  } else if (!seen.insert(t.get()).second) {
    return false;
  }
  bool found = false;
  for (const auto& a : t->args)
    if (max_class_index_rec(a, c, out, fuel, seen)) found = true;
  return found;
}

}  // namespace detail

inline void collect_vars(const Term& t, std::set<VarKey>& out) {
  std::size_t fuel = detail::kSharedWalkFuel;
  std::set<const Node*> seen;
  detail::collect_vars_rec(t, out, fuel, seen);
}

inline std::set<VarKey> vars(const Term& t) {
  std::set<VarKey> out;
  collect_vars(t, out);
  return out;
}

inline bool occurs(const VarKey& v, const Term& t) {
  std::size_t fuel = detail::kSharedWalkFuel;
  std::set<const Node*> seen;
  return detail::occurs_rec(v, t, fuel, seen);
}

inline bool contains_rec_var(const Term& t) {
  std::size_t fuel = detail::kSharedWalkFuel;
  std::set<const Node*> seen;
  return detail::contains_rec_var_rec(t, fuel, seen);
}

// Largest index of the given class occurring in t, or nullopt-like flag via
// the bool. Used by the finite-unifiability condition, where an absent class
// makes the bound vacuous.
inline bool max_class_index(const Term& t, ClassId c, std::uint32_t& out) {
  std::size_t fuel = detail::kSharedWalkFuel;
  std::set<const Node*> seen;
  return detail::max_class_index_rec(t, c, out, fuel, seen);
}

// A position is the path of argument indices from the root.
using Position = std::vector<std::uint32_t>;

inline void collect_positions(const Term& t, const Term& sub, Position& here,
                              std::vector<Position>& out) {
  if (equal(t, sub)) out.push_back(here);
  for (std::uint32_t i = 0; i < t->args.size(); ++i) {
    here.push_back(i);
    collect_positions(t->args[i], sub, here, out);
    here.pop_back();
  }
}

inline std::vector<Position> positions_of(const Term& t, const Term& sub) {
  std::vector<Position> out;
  Position here;
  collect_positions(t, sub, here, out);
  return out;
}

inline Position concat(Position a, const Position& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// New term with the subterm at the given position replaced, sharing all
// untouched structure.
inline Term replace_at(const Term& t, const Position& pos, const Term& sub,
                       std::size_t from = 0) {
  if (from == pos.size()) return sub;
  if (t->kind != Kind::App || pos[from] >= t->args.size())
    throw std::out_of_range("position does not exist in term");
  std::vector<Term> args = t->args;
  args[pos[from]] = replace_at(t->args[pos[from]], pos, sub, from + 1);
  return app(t->name, std::move(args));
}

inline void write_term(std::ostream& os, const Term& t) {
  switch (t->kind) {
    case Kind::ClassVar:
      os << class_letter(t->cls) << '_' << t->index;
      break;
    case Kind::RecVar:
      os << '#' << t->name;
      break;
    case Kind::App:
      os << t->name;
      if (!t->args.empty()) {
        os << '(';
        for (std::size_t i = 0; i < t->args.size(); ++i) {
          if (i) os << ',';
          write_term(os, t->args[i]);
        }
        os << ')';
      }
      break;
  }
}

inline std::string to_string(const Term& t) {
  std::ostringstream os;
  write_term(os, t);
  return os.str();
}

// Symbol table: arity per function symbol, inferred from terms and checked
// for consistency.
class Signature {
 public:
  void note(const std::string& symbol, std::size_t arity) {
    auto [it, fresh] = arity_.emplace(symbol, arity);
    if (!fresh && it->second != arity)
      throw std::invalid_argument("symbol '" + symbol +
                                  "' used with arities " +
                                  std::to_string(it->second) + " and " +
                                  std::to_string(arity));
  }

  void note_term(const Term& t) {
    if (t->kind == Kind::App) {
      note(t->name, t->args.size());
      for (const auto& a : t->args) note_term(a);
    }
  }

  bool contains(const std::string& symbol) const {
    return arity_.count(symbol) != 0;
  }

  std::size_t arity(const std::string& symbol) const {
    auto it = arity_.find(symbol);
    if (it == arity_.end())
      throw std::out_of_range("unknown symbol '" + symbol + "'");
    return it->second;
  }

  const std::map<std::string, std::size_t>& table() const { return arity_; }

 private:
  std::map<std::string, std::size_t> arity_;
};

}  // namespace loopunif
