#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopunif/semiloop.hpp"
#include "loopunif/term.hpp"

namespace loopunif {

// SplitMix64 (Steele, Lea, Flood). Fixed algorithm identity so seeded runs
// replay bit-identically on any platform; range reduction is plain modulo.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform-ish value in [0, n) by modulo reduction.
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }
};

// SplitMix64 finalizer, for deriving per-instance stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Instance streams: mixed (seed, index) so consecutive indices land on
// unrelated positions of the state space instead of overlapping sequences.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

struct GenConfig {
  std::uint64_t seed = 0;
  std::uint32_t max_depth = 4;  // extendable-side depth cap
  std::map<std::string, std::uint32_t> arity_profile = {{"h", 2}};
  std::uint32_t max_var_index = 4;     // leaf indices drawn from 1..max
  std::uint32_t recvar_positions = 1;  // recursion-var occurrences to place
  std::uint32_t fixed_term_depth = 4;
};

namespace detail {

inline void validate(const GenConfig& cfg) {
  if (cfg.arity_profile.empty())
    throw std::invalid_argument("generator needs at least one symbol");
  if (cfg.max_var_index < 1)
    throw std::invalid_argument("generator needs at least one variable index");
  if (cfg.recvar_positions < 1)
    throw std::invalid_argument(
        "generator places at least one recursion-variable occurrence");
  if (cfg.max_depth < 1)
    throw std::invalid_argument(
        "recursion variable must sit below the root, so max_depth >= 1");
  bool has_app = false;
  for (const auto& [sym, arity] : cfg.arity_profile)
    if (arity > 0) has_app = true;
  if (!has_app)
    throw std::invalid_argument(
        "recursion variable must sit below the root, so the profile needs a "
        "symbol of positive arity");
}

// Random term over one variable class. force_app keeps the root a proper
// application so leaves sit strictly below it.
inline Term gen_term(
    SplitMix64& rng,
    const std::vector<std::pair<std::string, std::uint32_t>>& symbols,
    std::uint32_t depth, ClassId cls, std::uint32_t max_var_index,
    bool force_app) {
  const bool go_app = depth > 0 && (force_app || rng.chance(2, 3));
  if (go_app) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const auto& [sym, arity] = symbols[rng.below(symbols.size())];
      if (arity == 0 && force_app) continue;
      if (arity == 0) return constant(sym);
      std::vector<Term> args;
      args.reserve(arity);
      for (std::uint32_t i = 0; i < arity; ++i)
        args.push_back(
            gen_term(rng, symbols, depth - 1, cls, max_var_index, false));
      return app(sym, std::move(args));
    }
    // Unreachable when the profile holds a positive-arity symbol (validated).
    throw std::logic_error("exhausted symbol draws");
  }
  return class_var(cls,
                   1 + static_cast<std::uint32_t>(rng.below(max_var_index)));
}

inline std::vector<Position> variable_leaves(const Term& t) {
  std::vector<Position> leaves;
  std::vector<std::pair<Position, Term>> stack{{Position{}, t}};
  while (!stack.empty()) {
    auto [pos, node] = stack.back();
    stack.pop_back();
    if (node->kind == Kind::App) {
      for (std::uint32_t i = 0; i < node->args.size(); ++i) {
        Position child = pos;
        child.push_back(i);
        stack.emplace_back(std::move(child), node->args[i]);
      }
    } else if (node->kind == Kind::ClassVar) {
      leaves.push_back(std::move(pos));
    }
  }
  std::sort(leaves.begin(), leaves.end());
  return leaves;
}

}  // namespace detail

// Deterministic in cfg.seed. The extendable side is an application over class
// x with cfg.recvar_positions distinct leaves rewritten to the recursion
// variable #a; the fixed side is a recursion-variable-free term over class y.
inline SemiloopSpec generate_semiloop(const GenConfig& cfg) {
  detail::validate(cfg);
  std::vector<std::pair<std::string, std::uint32_t>> symbols(
      cfg.arity_profile.begin(), cfg.arity_profile.end());
  SplitMix64 rng(cfg.seed);
  const Term rec = rec_var("a");
  Term s;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 64)
      throw std::invalid_argument("configured term shapes cannot host " +
                                  std::to_string(cfg.recvar_positions) +
                                  " recursion-variable occurrences");
    Term skeleton = detail::gen_term(rng, symbols, cfg.max_depth, ClassId::X,
                                     cfg.max_var_index, true);
    std::vector<Position> leaves = detail::variable_leaves(skeleton);
    if (leaves.size() < cfg.recvar_positions) continue;
    // Partial Fisher-Yates: the first recvar_positions slots become the
    // chosen (distinct) positions.
    for (std::uint32_t i = 0; i < cfg.recvar_positions; ++i) {
      std::size_t j = i + rng.below(leaves.size() - i);
      std::swap(leaves[i], leaves[j]);
    }
    Term candidate = skeleton;
    for (std::uint32_t i = 0; i < cfg.recvar_positions; ++i)
      candidate = replace_at(candidate, leaves[i], rec);
    s = candidate;
    break;
  }
  Term t = detail::gen_term(rng, symbols, cfg.fixed_term_depth, ClassId::Y,
                            cfg.max_var_index, false);
  return SemiloopSpec::make(s, t);
}

}  // namespace loopunif
