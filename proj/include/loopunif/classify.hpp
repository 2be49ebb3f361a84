#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopunif/decompose.hpp"
#include "loopunif/semiloop.hpp"
#include "loopunif/subst.hpp"
#include "loopunif/term.hpp"
#include "loopunif/unify.hpp"

namespace loopunif {

enum class Verdict {
  NotLoopUnifiable,
  FinitelyLoopUnifiable,
  InfinitelyLoopUnifiable,
  Inconclusive,
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::NotLoopUnifiable: return "not-loop-unifiable";
    case Verdict::FinitelyLoopUnifiable: return "finitely-loop-unifiable";
    case Verdict::InfinitelyLoopUnifiable: return "infinitely-loop-unifiable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct ProbeEntry {
  std::uint32_t n = 0;
  bool unifiable = false;
  bool extendably = false;
  std::optional<Term> recvar_binding;
};

// witness means: first non-unifiable extension (not), the extension whose
// unifier satisfied the finite condition (finitely), the certified extension
// index r (infinitely), or the probe bound (inconclusive).
struct Classification {
  Verdict verdict = Verdict::Inconclusive;
  std::uint32_t witness = 0;
  std::uint32_t bound = 0;
  bool resource_limited = false;
  std::optional<UnifyResult> failure;  // set for not-loop-unifiable
  std::optional<Cycle> cycle;          // set for infinitely-loop-unifiable
  std::optional<DecompTrace> trace;    // the trace the cycle was found in
  std::vector<ProbeEntry> log;         // one entry per probed extension
};

// Deep enough to clear the cycle-detection gate with room to spare, and at
// least a handful of probes even for flat problems.
inline std::uint32_t default_classify_bound(const SemiloopSpec& sl) {
  std::uint32_t d = 2 * sl.delta_or_zero() + 8;
  return d > 32 ? d : 32;
}

// Probes extensions 1..bound in order. Each probe can settle the problem
// three ways: a failed unification settles it negatively for good; a unifier
// meeting the finite condition settles every deeper extension positively; a
// repeated decomposition state — only sought once the extension index clears
// twice the index spread, and only while every prefix extension has been
// extendably unifiable — settles it positively without a finite witness.
// Extensions that unify without binding the recursion variable block the
// cycle route but not the other two, so probing continues.
inline Classification classify(const SemiloopSpec& sl, std::uint32_t bound = 0,
                               std::size_t node_budget = kDefaultNodeBudget) {
  Classification out;
  out.bound = bound != 0 ? bound : default_classify_bound(sl);
  const std::uint32_t delta = sl.delta_or_zero();
  ExtensionBuilder builder(sl, node_budget);
  bool prefix_extendable = true;
  try {
    {
      ExtendablyUnifiableReport rep0 = unify_extension(builder, 0);
      out.log.push_back(
          {0, rep0.unifiable, rep0.extendably, rep0.recvar_binding});
      prefix_extendable = rep0.extendably;
    }
    for (std::uint32_t n = 1; n <= out.bound; ++n) {
      ExtendablyUnifiableReport rep = unify_extension(builder, n);
      out.log.push_back(
          {n, rep.unifiable, rep.extendably, rep.recvar_binding});
      if (!rep.unifiable) {
        out.verdict = Verdict::NotLoopUnifiable;
        out.witness = n;
        out.failure = rep.outcome;
        return out;
      }
      if (check_finite_condition(sl, n, *rep.mgu)) {
        out.verdict = Verdict::FinitelyLoopUnifiable;
        out.witness = n;
        return out;
      }
      if (!rep.extendably) prefix_extendable = false;
      if (prefix_extendable && n >= 1 && n - 1 > 2 * delta) {
        DecompTrace tr = detail::run_orbit(sl, n, true, node_budget);
        CycleScan scan = detect_cycle(tr, delta);
        if (scan.outcome == CycleScanOutcome::Found) {
          out.verdict = Verdict::InfinitelyLoopUnifiable;
          out.witness = n - 1;
          out.cycle = scan.cycle;
          out.trace = std::move(tr);
          return out;
        }
      }
    }
  } catch (const ResourceLimit&) {
    out.resource_limited = true;
  }
  out.verdict = Verdict::Inconclusive;
  out.witness = out.bound;
  return out;
}

inline void write_classification(std::ostream& os, const Classification& c) {
  os << "verdict: " << to_string(c.verdict) << "\n";
  os << "witness: " << c.witness << "\n";
  os << "bound: " << c.bound << "\n";
  os << "resource-limited: " << (c.resource_limited ? "yes" : "no") << "\n";
  if (c.failure) {
    os << "failure: " << to_string(c.failure->status);
    if (c.failure->status == UnifyStatus::OccursCheck && c.failure->occurs)
      os << " " << c.failure->occurs->variable.to_string();
    os << "\n";
  }
  if (c.cycle) {
    os << "cycle: i=" << c.cycle->i << " j=" << c.cycle->j
       << " target=" << to_string(c.cycle->recurring_target)
       << " sigma=" << c.cycle->recurring_sigma.to_string() << "\n";
  }
  for (const auto& e : c.log) {
    os << "ext " << e.n << ": unifiable=" << (e.unifiable ? "yes" : "no")
       << " extendably=" << (e.extendably ? "yes" : "no") << " binding="
       << (e.recvar_binding ? to_string(*e.recvar_binding) : "-") << "\n";
  }
}

}  // namespace loopunif
