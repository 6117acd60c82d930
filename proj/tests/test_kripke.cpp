#include <catch_amalgamated.hpp>

#include "bhl/kripke.hpp"
#include "bhl/pretty.hpp"

using namespace bhl;

namespace {

AtomicFormula atom_a() { return AtomicFormula(Pred::IsNormal, {Term::pop("pp")}); }
AtomicFormula atom_b() {
  return AtomicFormula(Pred::EqVar, {Term::pop("pp"), Term::pop("qq")});
}

FormulaPtr fa() { return Formula::make_atom(atom_a()); }
FormulaPtr fb() { return Formula::make_atom(atom_b()); }

std::vector<KripkeModel> small_models() {
  return enumerate_models({atom_a(), atom_b()}, 3, {});
}

// Formulas exercised by the axiom suites.
std::vector<FormulaPtr> formula_pool() {
  return {
      fa(),
      fb(),
      Formula::negate(fa()),
      Formula::conj({fa(), fb()}),
      Formula::disj({fa(), Formula::negate(fb())}),
      Formula::possible(fa()),
      Formula::know(fb()),
      Formula::negate(Formula::know(fa())),
  };
}

}  // namespace

TEST_CASE("model enumeration is exhaustive and capped") {
  auto one = enumerate_models_exact({atom_a()}, 1, {});
  CHECK(one.size() == 2);  // one world, one atom, two valuations
  auto two = enumerate_models_exact({atom_a()}, 2, {});
  CHECK(two.size() == 8);  // 2 partitions x 4 valuations
  CHECK(small_models().size() == 4 + 2 * 16 + 5 * 64);
  CHECK_THROWS_AS(enumerate_models({atom_a()}, 5, {}), VerifyError);
}

TEST_CASE("axiom T: knowledge implies truth") {
  for (const KripkeModel& m : small_models())
    for (std::size_t w = 0; w < m.n_worlds; ++w)
      for (const FormulaPtr& f : formula_pool())
        if (satisfies(m, w, Formula::know(f))) REQUIRE(satisfies(m, w, f));
}

TEST_CASE("axiom 4: positive introspection") {
  for (const KripkeModel& m : small_models())
    for (std::size_t w = 0; w < m.n_worlds; ++w)
      for (const FormulaPtr& f : formula_pool()) {
        FormulaPtr kf = Formula::know(f);
        if (satisfies(m, w, kf)) REQUIRE(satisfies(m, w, Formula::know(kf)));
      }
}

TEST_CASE("axiom 5: negative introspection") {
  for (const KripkeModel& m : small_models())
    for (std::size_t w = 0; w < m.n_worlds; ++w)
      for (const FormulaPtr& f : formula_pool()) {
        FormulaPtr pf = Formula::possible(f);
        if (satisfies(m, w, pf)) REQUIRE(satisfies(m, w, Formula::know(pf)));
      }
}

TEST_CASE("Possible is the dual of Know on every model") {
  for (const KripkeModel& m : small_models())
    for (std::size_t w = 0; w < m.n_worlds; ++w)
      for (const FormulaPtr& f : formula_pool()) {
        bool p = satisfies(m, w, Formula::possible(f));
        bool nk = !satisfies(m, w, Formula::know(Formula::negate(f)));
        REQUIRE(p == nk);
      }
}

TEST_CASE("ground comparison atoms need no valuation") {
  KripkeModel m;
  m.n_worlds = 1;
  m.block_of = {0};
  m.valuation = {{}};
  m.histories = {TestHistory{}};
  CHECK(satisfies(m, 0,
                  Formula::make_atom(Pred::Lt, {Term::real(Rat(1)), Term::real(Rat(2))})));
  CHECK_FALSE(satisfies(
      m, 0, Formula::make_atom(Pred::Gt, {Term::real(Rat(1)), Term::real(Rat(2))})));
  CHECK_THROWS_AS(satisfies(m, 0, fa()), VerifyError);
}

TEST_CASE("StatB truth at a world is p-value composition over its history") {
  FormulaPtr h = Formula::make_atom(Pred::Neq, {Term::mean_pop("pp"), Term::real(Rat(1))});
  TestHistory once;
  once.entries.push_back(HistoryEntry("t", h, PValueRecord::exact(Rat(3, 100))));
  TestHistory twice = once.cons(HistoryEntry("t", h, PValueRecord::exact(Rat(1, 50))));
  TestHistory unknown_tail = once;
  unknown_tail.tail_unknown = true;

  KripkeModel m;
  m.n_worlds = 4;
  m.block_of = {0, 1, 2, 3};
  m.valuation = {{}, {}, {}, {}};
  m.histories = {TestHistory{}, once, twice, unknown_tail};

  FormulaPtr claim_loose = Formula::stat_b(PValueRecord::at_most(Rat(1, 20)), h);
  FormulaPtr claim_tight = Formula::stat_b(PValueRecord::at_most(Rat(1, 100)), h);
  FormulaPtr claim_exact = Formula::stat_b(PValueRecord::exact(Rat(3, 100)), h);

  CHECK_FALSE(satisfies(m, 0, claim_loose));  // hypothesis never tested
  CHECK(satisfies(m, 1, claim_loose));
  CHECK_FALSE(satisfies(m, 1, claim_tight));
  CHECK(satisfies(m, 1, claim_exact));
  // two runs of the same test: Bonferroni sum 3/100 + 1/50 = 1/20
  CHECK(satisfies(m, 2, claim_loose));
  CHECK_FALSE(satisfies(m, 2, claim_exact));  // summed bound is AtMost, not Exact
  CHECK_FALSE(satisfies(m, 3, claim_loose));  // unconstrained older tests
}
