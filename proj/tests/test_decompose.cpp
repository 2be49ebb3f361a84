#include "loopunif/decompose.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <variant>

#include "loopunif/oracle.hpp"
#include "loopunif/parse.hpp"
#include "loopunif/semiloop.hpp"
#include "loopunif/subst.hpp"
#include "loopunif/term.hpp"

using namespace loopunif;

namespace {

SemiloopSpec spec(const char* s, const char* t) {
  return SemiloopSpec::make(parse_term(s), parse_term(t));
}

// Deep fixed side: failures surface late, every early level is decomposable.
const SemiloopSpec kLate =
    spec("h(h(x_6,h(x_1,x_6)),#a)", "h(y_1,h(y_2,y_1))");
// Recursion variable at the root's first argument; index spread zero.
const SemiloopSpec kNest =
    spec("h(#a,h(h(x_1,x_1),x_1))", "h(h(h(y_1,y_1),y_1),y_1)");
const SemiloopSpec kCycle = spec("h(h(x_1,x_1),#a)", "h(y_1,y_1)");
const SemiloopSpec kOccurs = spec("h(x_2,h(x_4,#a))", "h(y_1,y_1)");

DecompTrace trace_of(const SemiloopSpec& sl, std::uint32_t k,
                     bool windowed = true) {
  DecompResult res =
      windowed ? decompose_Dprime(sl, k) : decompose_D(sl, k);
  REQUIRE(std::holds_alternative<DecompTrace>(res));
  return std::get<DecompTrace>(res);
}

Substitution engine_mgu(const SemiloopSpec& sl, std::uint32_t n) {
  ExtendablyUnifiableReport rep = unify_extension(sl, n);
  REQUIRE(rep.unifiable);
  return *rep.mgu;
}

}  // namespace

TEST_CASE("decomposition peels one level per step", "[decompose]") {
  DecompTrace tr = trace_of(kLate, 3);
  REQUIRE(tr.k == 3);
  REQUIRE(tr.steps.size() == 3);
  CHECK(step_at_depth(tr, 3).theta.to_string() ==
        "{y_1 -> h(x_6,h(x_1,x_6))}");
  CHECK(step_at_depth(tr, 2).theta.to_string() ==
        "{y_2 -> h(x_6,h(x_1,x_6))}");
  CHECK(step_at_depth(tr, 1).theta.to_string() ==
        "{x_8 -> h(x_6,h(x_1,x_6))}");
  CHECK(step_at_depth(tr, 3).shift_amount == 2);
  CHECK(step_at_depth(tr, 2).shift_amount == 1);
  CHECK(step_at_depth(tr, 1).shift_amount == 0);
  CHECK(to_string(step_at_depth(tr, 3).t_prime) ==
        "h(y_2,h(x_6,h(x_1,x_6)))");
  CHECK(to_string(step_at_depth(tr, 3).residual_target) ==
        "h(y_2,h(x_7,h(x_2,x_7)))");
  CHECK(tr.final_binding.to_string() == "{#a -> h(x_3,h(x_6,h(x_1,x_6)))}");
  CHECK_THROWS_AS(step_at_depth(tr, 0), std::out_of_range);
  CHECK_THROWS_AS(step_at_depth(tr, 4), std::out_of_range);

  // Composing the trace back yields exactly the engine's unifier, which is
  // also what resolving the stage-wise triangular map gives.
  Substitution direct = engine_mgu(kLate, 3);
  CHECK(compose_trace(tr) == direct);
  Substitution staged{{yvar(1), parse_term("h(x_8,h(x_3,x_8))")},
                      {yvar(2), parse_term("h(x_7,h(x_2,x_7))")},
                      {xvar(8), parse_term("h(x_6,h(x_1,x_6))")},
                      {rec_var("a"), parse_term("h(x_3,h(x_6,h(x_1,x_6)))")}};
  CHECK(staged.normalized() == direct);
}

TEST_CASE("nested recursion decomposes into alternating step unifiers",
          "[decompose]") {
  DecompTrace tr = trace_of(kNest, 5);
  const char* kBase = "h(h(x_1,x_1),x_1)";
  CHECK(step_at_depth(tr, 5).theta.to_string() ==
        "{y_1 -> " + std::string(kBase) + "}");
  CHECK(step_at_depth(tr, 4).theta.to_string() == "{x_2 -> x_1}");
  CHECK(step_at_depth(tr, 3).theta.to_string() == "{x_2 -> x_1}");
  CHECK(step_at_depth(tr, 2).theta.to_string() ==
        "{x_2 -> " + std::string(kBase) + "}");
  CHECK(step_at_depth(tr, 1).theta.to_string() == "{x_2 -> x_1}");
  const char* kT1 = "h(h(x_2,x_2),x_2)";
  CHECK(to_string(step_at_depth(tr, 5).residual_target) ==
        "h(h(" + std::string(kT1) + "," + kT1 + ")," + kT1 + ")");
  CHECK(to_string(step_at_depth(tr, 4).residual_target) ==
        "h(" + std::string(kT1) + "," + kT1 + ")");
  CHECK(to_string(step_at_depth(tr, 3).residual_target) == kT1);
  CHECK(to_string(step_at_depth(tr, 2).residual_target) ==
        "h(" + std::string(kT1) + "," + kT1 + ")");
  CHECK(to_string(step_at_depth(tr, 1).residual_target) == kT1);
  CHECK(tr.final_binding.to_string() ==
        "{#a -> " + std::string(kBase) + "}");
}

TEST_CASE("both operators agree on everything they store", "[decompose]") {
  for (std::uint32_t k = 1; k <= 5; ++k) {
    DecompTrace full = trace_of(kNest, k, false);
    DecompTrace windowed = trace_of(kNest, k, true);
    REQUIRE(full.k == windowed.k);
    for (std::uint32_t d = 1; d <= k; ++d) {
      CHECK(step_at_depth(full, d).theta == step_at_depth(windowed, d).theta);
      CHECK(equal(step_at_depth(full, d).residual_target,
                  step_at_depth(windowed, d).residual_target));
      CHECK(step_at_depth(full, d).sigma_delta ==
            step_at_depth(windowed, d).sigma_delta);
    }
    CHECK(full.final_binding == windowed.final_binding);
    CHECK(compose_trace(full) == engine_mgu(kNest, k));
  }
  for (std::uint32_t k = 1; k <= 4; ++k) {
    CHECK(compose_trace(trace_of(kLate, k, false)) == engine_mgu(kLate, k));
    CHECK(compose_trace(trace_of(kLate, k, true)) == engine_mgu(kLate, k));
  }
}

TEST_CASE("decomposition refuses unqualified levels", "[decompose]") {
  // Level 1 of this pair unifies but leaves the recursion variable free, so
  // no decomposition past level 0 exists.
  DecompResult res = decompose_Dprime(kOccurs, 3);
  REQUIRE(std::holds_alternative<DecompPreconditionFailure>(res));
  const auto& fail = std::get<DecompPreconditionFailure>(res);
  CHECK(fail.first_bad_extension == 1);
  CHECK(fail.unifiable);
  CHECK(fail.outcome.unifiable());
  CHECK(check_decomposable(kOccurs, 3).has_value());
  CHECK_FALSE(check_decomposable(kLate, 5).has_value());
  CHECK_FALSE(check_decomposable(kOccurs, 0).has_value());
  CHECK_THROWS_AS(decompose_D(kLate, 3, 5), ResourceLimit);
}

TEST_CASE("segments compose stored step unifiers", "[decompose]") {
  DecompTrace tr = trace_of(kNest, 5);
  CHECK(sub_segment(tr, 5, 1) == compose_trace(tr));
  CHECK(sub_segment(tr, 5, 0) == compose_trace(tr));
  CHECK(segment(tr, 0, 0) == Substitution::identity());
  CHECK(segment(tr, 3, 3) ==
        shift_x(step_at_depth(tr, 3).theta, 2));
  CHECK(segment(tr, 3, 1) ==
        compose(compose(shift_x(step_at_depth(tr, 3).theta, 2),
                        shift_x(step_at_depth(tr, 2).theta, 1)),
                step_at_depth(tr, 1).theta));
  CHECK_THROWS_AS(segment(tr, 6, 1), std::out_of_range);
  CHECK_THROWS_AS(segment(tr, 2, 3), std::out_of_range);
  // Closing at depth j plugs that step's recursion-variable binding.
  Substitution closed = sub_segment(tr, 5, 4);
  Substitution by_hand = compose(
      compose(shift_x(step_at_depth(tr, 5).theta, 4),
              shift_x(step_at_depth(tr, 4).theta, 3)),
      Substitution{{rec_var("a"), step_at_depth(tr, 4).t_prime}});
  CHECK(closed == by_hand);
}

TEST_CASE("step unifiers depend on position, not trace depth", "[decompose]") {
  DecompTrace tr5 = trace_of(kNest, 5);
  DecompTrace tr3 = trace_of(kNest, 3);
  // Position c sits at depth k-c+1; the same position carries the same
  // unshifted unifier in both traces.
  for (std::uint32_t c = 1; c <= 3; ++c)
    CHECK(step_at_depth(tr5, 5 - c + 1).theta ==
          step_at_depth(tr3, 3 - c + 1).theta);
  // Hence a segment of the deeper trace is the shallower trace's segment,
  // uniformly shifted by the depth difference.
  for (auto [i, j] : {std::pair{3u, 1u}, {2u, 1u}, {3u, 2u}, {3u, 3u}})
    CHECK(segment(tr5, i + 2, j + 2) == shift_x(segment(tr3, i, j), 2));
  DecompTrace late4 = trace_of(kLate, 4);
  DecompTrace late2 = trace_of(kLate, 2);
  for (auto [i, j] : {std::pair{2u, 1u}, {2u, 2u}, {1u, 1u}})
    CHECK(segment(late4, i + 2, j + 2) == shift_x(segment(late2, i, j), 2));
}

TEST_CASE("cycle detection needs the spread-derived depth", "[decompose]") {
  // Depth 1 certifies extension 0 only: never applicable.
  CHECK(detect_cycle(trace_of(kNest, 1), 0).outcome ==
        CycleScanOutcome::NotApplicable);
  // Spread 5 needs the certified extension past 10.
  CHECK(detect_cycle(trace_of(kLate, 4), kLate.delta()).outcome ==
        CycleScanOutcome::NotApplicable);
  CHECK(detect_cycle(trace_of(kNest, 3), 0).outcome ==
        CycleScanOutcome::NoCycle);
  // The recurring target is whatever sits at the matched depths, and depths
  // name different positions in traces of different length: the k=4 trace
  // repeats the two-copy target, the k=5 trace the one-copy target.
  for (auto [k, target] :
       {std::pair<std::uint32_t, const char*>{
            4u, "h(h(h(x_2,x_2),x_2),h(h(x_2,x_2),x_2))"},
        {5u, "h(h(x_2,x_2),x_2)"}}) {
    CycleScan scan = detect_cycle(trace_of(kNest, k), 0);
    REQUIRE(scan.outcome == CycleScanOutcome::Found);
    REQUIRE(scan.cycle.has_value());
    CHECK(scan.cycle->r == k - 1);
    CHECK(scan.cycle->i == 3);
    CHECK(scan.cycle->j == 1);
    CHECK(to_string(scan.cycle->recurring_target) == target);
    CHECK(scan.cycle->recurring_sigma.empty());
  }
  CycleScan tight = detect_cycle(trace_of(kCycle, 2), kCycle.delta());
  REQUIRE(tight.outcome == CycleScanOutcome::Found);
  CHECK(tight.cycle->i == 2);
  CHECK(tight.cycle->j == 1);
  CHECK(to_string(tight.cycle->recurring_target) == "h(x_2,x_2)");
}

TEST_CASE("a cycle rebuilds unifiers for any deeper extension",
          "[decompose]") {
  DecompTrace tr = trace_of(kNest, 5);
  CycleScan scan = detect_cycle(tr, 0);
  REQUIRE(scan.outcome == CycleScanOutcome::Found);
  const Cycle& cyc = *scan.cycle;

  Substitution s5 = build_unifier_from_cycle(tr, cyc, 5);
  CHECK(s5 == engine_mgu(kNest, 5));
  CHECK(to_string(*s5.lookup(VarKey::of(xvar(2)))) == "x_1");
  CHECK(to_string(*s5.lookup(VarKey::of(rec_var("a")))) ==
        "h(h(x_1,x_1),x_1)");

  // One past the trace: positions fold into the cycle.
  Substitution s6 = build_unifier_from_cycle(tr, cyc, 6);
  CHECK(s6 == engine_mgu(kNest, 6));

  // Far past the trace: check against the reference extension directly.
  for (std::uint32_t k : {9u, 12u}) {
    Substitution sk = build_unifier_from_cycle(tr, cyc, k);
    CHECK(verify_unifier(oracle_extension(kNest, k), kNest.fixed(), sk));
  }

  DecompTrace two = trace_of(kCycle, 2);
  CycleScan tight = detect_cycle(two, kCycle.delta());
  REQUIRE(tight.outcome == CycleScanOutcome::Found);
  for (std::uint32_t k = 1; k <= 20; ++k) {
    Substitution sk = build_unifier_from_cycle(two, *tight.cycle, k);
    CHECK(verify_unifier(oracle_extension(kCycle, k), kCycle.fixed(), sk));
  }

  CHECK_THROWS_AS(build_unifier_from_cycle(tr, cyc, 3),
                  std::invalid_argument);
  Cycle bad = cyc;
  bad.j = 0;
  CHECK_THROWS_AS(build_unifier_from_cycle(tr, bad, 6),
                  std::invalid_argument);
  bad = cyc;
  bad.i = 9;
  CHECK_THROWS_AS(build_unifier_from_cycle(tr, bad, 6),
                  std::invalid_argument);
}

TEST_CASE("the finite condition accepts exactly the stable unifiers",
          "[decompose]") {
  const SemiloopSpec fin = spec("h(h(h(x_2,h(x_1,x_1)),x_3),#a)",
                                "h(h(y_4,y_3),h(y_1,y_2))");
  // Level 1 binds the recursion variable: not yet stable.
  CHECK_FALSE(check_finite_condition(fin, 1, engine_mgu(fin, 1)));
  // Level 2 leaves it free with every carrier outside the term's range:
  // stable, and indeed every deeper level unifies.
  CHECK(check_finite_condition(fin, 2, engine_mgu(fin, 2)));
  for (std::uint32_t n = 3; n <= 8; ++n)
    CHECK(unify_extension(fin, n).unifiable);

  // Carriers inside the term's index range are rejected even though the
  // recursion variable is free; level 3 then fails.
  CHECK_FALSE(check_finite_condition(kOccurs, 1, engine_mgu(kOccurs, 1)));
  CHECK_FALSE(check_finite_condition(kOccurs, 2, engine_mgu(kOccurs, 2)));
  CHECK_FALSE(unify_extension(kOccurs, 3).unifiable);

  CHECK_THROWS_AS(check_finite_condition(fin, 0, Substitution::identity()),
                  std::invalid_argument);
}

TEST_CASE("the finite condition reads the term raw, not just instantiated",
          "[decompose]") {
  // This unifier maps every variable of the extendable term into terms
  // carrying the recursion variable, wiping their indices from the applied
  // form. Judged on the applied form alone the carriers would look clear,
  // but the very next extension fails an occurs check.
  const SemiloopSpec sl = spec(
      "h(x_2,h(h(h(x_1,#a),h(x_4,x_1)),h(h(x_3,x_3),h(x_3,x_1))))",
      "h(y_3,h(h(h(y_1,y_2),h(y_2,y_2)),h(h(y_3,y_2),h(y_2,y_4))))");
  ExtendablyUnifiableReport r1 = unify_extension(sl, 1);
  REQUIRE(r1.unifiable);
  REQUIRE_FALSE(r1.mgu->contains(sl.recvar_key()));
  CHECK_FALSE(check_finite_condition(sl, 1, *r1.mgu));
  CHECK_FALSE(unify_extension(sl, 2).unifiable);
}

TEST_CASE("traces print one line per step", "[decompose]") {
  DecompTrace tr = trace_of(kCycle, 2);
  std::ostringstream os;
  write_trace(os, tr);
  CHECK(os.str() ==
        "step depth=2 shift=1 theta={y_1 -> h(x_1,x_1)} target=h(x_2,x_2)"
        " sigma_delta={}\n"
        "step depth=1 shift=0 theta={x_2 -> h(x_1,x_1)} target=h(x_2,x_2)"
        " sigma_delta={}\n"
        "final {#a -> h(x_1,x_1)}\n");
}
