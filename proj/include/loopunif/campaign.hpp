#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <map>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "loopunif/classify.hpp"
#include "loopunif/decompose.hpp"
#include "loopunif/generate.hpp"
#include "loopunif/oracle.hpp"
#include "loopunif/semiloop.hpp"
#include "loopunif/subst.hpp"
#include "loopunif/term.hpp"
#include "loopunif/unify.hpp"

namespace loopunif {

struct CampaignReport {
  std::uint64_t total = 0;
  std::uint64_t count_not = 0;
  std::uint64_t count_finitely = 0;
  std::uint64_t count_infinitely = 0;
  std::uint64_t count_inconclusive = 0;
  std::map<std::uint32_t, std::uint64_t> hist_not;
  std::map<std::uint32_t, std::uint64_t> hist_finitely;
  std::map<std::uint32_t, std::uint64_t> hist_infinitely;
  std::map<std::uint32_t, std::uint64_t> hist_inconclusive;
  std::vector<std::string> oracle_disagreements;  // must stay empty
  std::vector<std::string> soundness_violations;  // must stay empty
  std::uint64_t resource_limited = 0;     // classifications cut by budget
  std::uint64_t comparisons_skipped = 0;  // duty checks cut by budget
  double wall_ms = 0.0;                   // never serialized; stderr only
};

namespace detail {

struct InstanceOutcome {
  Verdict verdict = Verdict::Inconclusive;
  std::uint32_t witness = 0;
  bool resource_limited = false;
  std::uint64_t skipped = 0;
  std::vector<std::string> disagreements;
  std::vector<std::string> violations;
};

// Classify one generated semiloop and discharge the verdict's duties: a
// negative verdict must be reproduced by the oracle, a finite one must keep
// unifying past the witness, an infinite one must yield oracle-verified
// reconstructions. Every probed prefix extension is also cross-checked
// engine-vs-oracle. Budget exhaustion skips a check; it never fails one.
inline InstanceOutcome run_instance(const GenConfig& base, std::uint64_t index,
                                    std::uint32_t bound) {
  InstanceOutcome out;
  GenConfig cfg = base;
  cfg.seed = stream_seed(base.seed, index);
  SemiloopSpec sl = generate_semiloop(cfg);
  const std::string tag = "instance " + std::to_string(index) + " <" +
                          to_string(sl.extendable()) + ", " +
                          to_string(sl.fixed()) + "|";
  Classification c = classify(sl, bound);
  out.verdict = c.verdict;
  out.witness = c.witness;
  out.resource_limited = c.resource_limited;

  // Engine/oracle agreement over the probed prefix.
  const std::uint32_t probed = c.log.empty() ? 0 : c.log.back().n;
  const std::uint32_t agree_upto = std::min<std::uint32_t>(probed, 12);
  {
    ExtensionBuilder b(sl, kDefaultNodeBudget);
    for (std::uint32_t n = 1; n <= agree_upto; ++n) {
      try {
        ExtendablyUnifiableReport eng = unify_extension(b, n);
        UnifyResult orc = oracle_unify_extension(sl, n);
        if (eng.unifiable != orc.unifiable()) {
          out.disagreements.push_back(
              tag + " extension " + std::to_string(n) + ": engine says " +
              (eng.unifiable ? "unifiable" : "not unifiable") +
              ", oracle disagrees");
        } else if (eng.unifiable && !(*eng.mgu == orc.mgu)) {
          out.disagreements.push_back(tag + " extension " + std::to_string(n) +
                                      ": binding maps differ: engine " +
                                      eng.mgu->to_string() + " vs oracle " +
                                      orc.mgu.to_string());
        }
      } catch (const ResourceLimit&) {
        ++out.skipped;
        break;
      }
    }
  }

  switch (c.verdict) {
    case Verdict::NotLoopUnifiable:
      try {
        if (oracle_unify_extension(sl, c.witness).unifiable())
          out.violations.push_back(
              tag + ": engine reports extension " + std::to_string(c.witness) +
              " not unifiable, oracle unifies it");
      } catch (const ResourceLimit&) {
        ++out.skipped;
      }
      break;
    case Verdict::FinitelyLoopUnifiable:
      for (std::uint32_t j = c.witness + 1; j <= c.witness + 20; ++j) {
        try {
          if (!oracle_unify_extension(sl, j).unifiable()) {
            out.violations.push_back(
                tag + ": finite condition held at " +
                std::to_string(c.witness) + " but oracle refutes extension " +
                std::to_string(j));
            break;
          }
        } catch (const ResourceLimit&) {
          ++out.skipped;
          break;
        }
      }
      break;
    case Verdict::InfinitelyLoopUnifiable: {
      const std::uint32_t hi = c.witness + 2 * sl.delta_or_zero() + 10;
      ExtensionBuilder guard(sl, kDefaultNodeBudget);
      for (std::uint32_t k = c.witness; k <= hi; ++k) {
        try {
          guard.extension(k);  // size gate before the unbudgeted oracle build
          Substitution sig = build_unifier_from_cycle(*c.trace, *c.cycle, k);
          Term ext = oracle_extension(sl, k);
          if (!verify_unifier(ext, sl.fixed(), sig)) {
            out.violations.push_back(
                tag + ": constructed unifier fails extension " +
                std::to_string(k));
            break;
          }
          if (!oracle_unify(ext, sl.fixed()).unifiable()) {
            out.violations.push_back(
                tag + ": cycle verdict but oracle refutes extension " +
                std::to_string(k));
            break;
          }
        } catch (const ResourceLimit&) {
          ++out.skipped;
          break;
        }
      }
      break;
    }
    case Verdict::Inconclusive:
      break;
  }
  return out;
}

}  // namespace detail

// Work-stealing over independent instances; the report is merged in index
// order, so its bytes are independent of thread count and scheduling.
// Wall-clock time goes to `wall` (if any), never into the report body.
inline CampaignReport run_campaign(const GenConfig& cfg, std::uint64_t count,
                                   std::uint32_t bound = 0, unsigned jobs = 0,
                                   std::ostream* wall = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<detail::InstanceOutcome> results(count);
  std::atomic<std::uint64_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t i = cursor.fetch_add(1);
      if (i >= count) return;
      try {
        results[i] = detail::run_instance(cfg, i, bound);
      } catch (const std::exception& e) {
        results[i].violations.push_back("instance " + std::to_string(i) +
                                        ": internal error: " + e.what());
      }
    }
  };
  unsigned n_threads = jobs != 0 ? jobs : std::thread::hardware_concurrency();
  if (n_threads < 1) n_threads = 1;
  if (count < n_threads) n_threads = static_cast<unsigned>(count);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  CampaignReport rep;
  rep.total = count;
  for (const auto& r : results) {
    switch (r.verdict) {
      case Verdict::NotLoopUnifiable:
        ++rep.count_not;
        ++rep.hist_not[r.witness];
        break;
      case Verdict::FinitelyLoopUnifiable:
        ++rep.count_finitely;
        ++rep.hist_finitely[r.witness];
        break;
      case Verdict::InfinitelyLoopUnifiable:
        ++rep.count_infinitely;
        ++rep.hist_infinitely[r.witness];
        break;
      case Verdict::Inconclusive:
        ++rep.count_inconclusive;
        ++rep.hist_inconclusive[r.witness];
        break;
    }
    if (r.resource_limited) ++rep.resource_limited;
    rep.comparisons_skipped += r.skipped;
    rep.oracle_disagreements.insert(rep.oracle_disagreements.end(),
                                    r.disagreements.begin(),
                                    r.disagreements.end());
    rep.soundness_violations.insert(rep.soundness_violations.end(),
                                    r.violations.begin(), r.violations.end());
  }
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  if (wall) *wall << "campaign wall clock: " << rep.wall_ms << " ms\n";
  return rep;
}

namespace detail {

inline void write_histogram(std::ostream& os, const char* label,
                            const std::map<std::uint32_t, std::uint64_t>& h) {
  os << "histogram " << label << ":";
  if (h.empty()) {
    os << " -";
  } else {
    for (const auto& [witness, n] : h) os << " " << witness << ":" << n;
  }
  os << "\n";
}

}  // namespace detail

inline void write_campaign_report(std::ostream& os, const CampaignReport& r) {
  os << "total: " << r.total << "\n";
  os << "not-loop-unifiable: " << r.count_not << "\n";
  os << "finitely-loop-unifiable: " << r.count_finitely << "\n";
  os << "infinitely-loop-unifiable: " << r.count_infinitely << "\n";
  os << "inconclusive: " << r.count_inconclusive << "\n";
  os << "resource-limited: " << r.resource_limited << "\n";
  os << "oracle-comparisons-skipped: " << r.comparisons_skipped << "\n";
  detail::write_histogram(os, "not-loop-unifiable", r.hist_not);
  detail::write_histogram(os, "finitely-loop-unifiable", r.hist_finitely);
  detail::write_histogram(os, "infinitely-loop-unifiable", r.hist_infinitely);
  detail::write_histogram(os, "inconclusive", r.hist_inconclusive);
  os << "oracle-disagreements: " << r.oracle_disagreements.size() << "\n";
  for (const auto& d : r.oracle_disagreements) os << "disagreement: " << d << "\n";
  os << "soundness-violations: " << r.soundness_violations.size() << "\n";
  for (const auto& v : r.soundness_violations) os << "violation: " << v << "\n";
}

}  // namespace loopunif
