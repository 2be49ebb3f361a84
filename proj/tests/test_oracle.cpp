#include "loopunif/oracle.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <utility>
#include <vector>

#include "loopunif/generate.hpp"
#include "loopunif/parse.hpp"
#include "loopunif/semiloop.hpp"
#include "loopunif/subst.hpp"
#include "loopunif/term.hpp"
#include "loopunif/unify.hpp"

using namespace loopunif;

namespace {

SemiloopSpec spec(const char* s, const char* t) {
  return SemiloopSpec::make(parse_term(s), parse_term(t));
}

}  // namespace

TEST_CASE("reference unifier solves hand cases", "[oracle]") {
  UnifyResult r = oracle_unify(parse_term("h(x_1,y_1)"), parse_term("h(y_2,x_2)"));
  REQUIRE(r.unifiable());
  CHECK(r.mgu.to_string() == "{y_1 -> x_2, y_2 -> x_1}");
  CHECK(oracle_unify(parse_term("c"), parse_term("d")).status ==
        UnifyStatus::Clash);
  CHECK(oracle_unify(parse_term("x_1"), parse_term("h(x_1,x_1)")).status ==
        UnifyStatus::OccursCheck);
  // Indirect cycle through two variables.
  CHECK(oracle_unify(parse_term("h(x_1,x_2)"), parse_term("h(h(x_2,x_2),x_1)"))
            .status == UnifyStatus::OccursCheck);
}

TEST_CASE("verify accepts exactly the unifiers", "[oracle]") {
  Term s = parse_term("h(x_1,y_1)");
  Term t = parse_term("h(y_2,y_2)");
  CHECK(verify_unifier(s, t, Substitution{{yvar(2), xvar(1)},
                                          {yvar(1), xvar(1)}}));
  CHECK_FALSE(verify_unifier(s, t, Substitution{{yvar(2), xvar(1)}}));
  CHECK(verify_unifier(s, s, Substitution::identity()));
}

TEST_CASE("extension built by the other route matches the builder",
          "[oracle]") {
  SemiloopSpec occ = spec("h(x_2,h(x_4,#a))", "h(y_1,y_1)");
  SemiloopSpec fin = spec("h(h(h(x_2,h(x_1,x_1)),x_3),#a)",
                          "h(h(y_4,y_3),h(y_1,y_2))");
  SemiloopSpec deg = spec("h(x_1,x_2)", "h(y_1,y_2)");
  for (const SemiloopSpec& sl : {occ, fin, deg}) {
    ExtensionBuilder builder(sl);
    for (std::uint32_t n = 0; n <= 8; ++n)
      CHECK(equal(oracle_extension(sl, n), builder.extension(n).term));
  }
  CHECK(to_string(oracle_extension(occ, 0)) == "#a");
  CHECK(equal(oracle_extension(occ, 1), occ.extendable()));
  CHECK(to_string(oracle_extension(occ, 2)) ==
        "h(x_3,h(x_5,h(x_2,h(x_4,#a))))");
  // Degenerate base: every extension past 0 is the base itself.
  CHECK(equal(oracle_extension(deg, 5), deg.extendable()));
}

TEST_CASE("reference unifier honours its work budget", "[oracle]") {
  Term s = parse_term("h(h(x_1,x_1),h(x_2,x_2))");
  Term t = parse_term("h(x_2,x_3)");
  CHECK(oracle_unify(s, t).unifiable());
  CHECK_THROWS_AS(oracle_unify(s, t, 3), ResourceLimit);
  SemiloopSpec occ = spec("h(x_2,h(x_4,#a))", "h(y_1,y_1)");
  CHECK_THROWS_AS(oracle_unify_extension(occ, 6, 10), ResourceLimit);
}

TEST_CASE("engine and reference agree on a random sweep", "[oracle]") {
  // Agreement is on unifiable-versus-not and, when unifiable, on the exact
  // idempotent unifier. Failure kinds are not compared: on problems holding
  // both a clash and a cycle the two algorithms legitimately stop on
  // different offenders.
  SplitMix64 rng(0x0c513eULL);
  const std::vector<std::pair<std::string, std::uint32_t>> symbols = {
      {"c", 0}, {"g", 1}, {"h", 2}};
  int unifiable = 0, failed = 0;
  for (int i = 0; i < 2000; ++i) {
    ClassId right = rng.chance(1, 2) ? ClassId::X : ClassId::Y;
    Term a = detail::gen_term(rng, symbols, 4, ClassId::X, 3, false);
    Term b = detail::gen_term(rng, symbols, 4, right, 3, false);
    UnifyResult engine = unify(a, b);
    UnifyResult ref = oracle_unify(a, b);
    REQUIRE(engine.unifiable() == ref.unifiable());
    if (engine.unifiable()) {
      ++unifiable;
      CHECK(engine.mgu == ref.mgu);
      CHECK(verify_unifier(a, b, ref.mgu));
      CHECK(ref.mgu.is_idempotent());
    } else {
      ++failed;
    }
  }
  CHECK(unifiable > 100);
  CHECK(failed > 100);
}

TEST_CASE("extension unification agrees with the engine per level",
          "[oracle]") {
  SemiloopSpec fin = spec("h(h(h(x_2,h(x_1,x_1)),x_3),#a)",
                          "h(h(y_4,y_3),h(y_1,y_2))");
  ExtensionBuilder builder(fin);
  for (std::uint32_t n = 1; n <= 6; ++n) {
    UnifyResult engine =
        unify(builder.extension(n).term, builder.extension(n).fixed);
    UnifyResult ref = oracle_unify_extension(fin, n);
    CHECK(engine.unifiable() == ref.unifiable());
    if (engine.unifiable() && ref.unifiable()) CHECK(engine.mgu == ref.mgu);
  }
}
