#include <random>

#include <catch_amalgamated.hpp>

#include "bhl/pvexpr.hpp"
#include "bhl/rational.hpp"

using namespace bhl;

TEST_CASE("rational literals parse exactly") {
  CHECK(parse_rat("3") == Rat(3));
  CHECK(parse_rat("0.05") == Rat(1, 20));
  CHECK(parse_rat("3/100") == Rat(3, 100));
  CHECK(parse_rat("-0.5") == Rat(-1, 2));
  CHECK(parse_rat("1.25") == Rat(5, 4));
  CHECK_THROWS_AS(parse_rat(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_rat("1."), std::invalid_argument);
  CHECK_THROWS_AS(parse_rat("abc"), std::invalid_argument);
}

TEST_CASE("rational rendering prefers decimals") {
  CHECK(rat_to_string(Rat(1, 20)) == "0.05");
  CHECK(rat_to_string(Rat(3)) == "3");
  CHECK(rat_to_string(Rat(1, 3)) == "1/3");
  CHECK(rat_to_string(Rat(-5, 4)) == "-1.25");
}

TEST_CASE("pv_canon flattens, folds and sorts") {
  PvExpr p1 = PvExpr::variable("p1"), p2 = PvExpr::variable("p2");
  CHECK(pv_equal(pv_sum({p2, p1}), pv_sum({p1, p2})));
  CHECK(pv_equal(pv_sum({p1, pv_sum({p2, PvExpr::constant(Rat(0))})}),
                 pv_sum({p1, p2})));
  CHECK(pv_equal(pv_sum({PvExpr::constant(Rat(1, 4)), PvExpr::constant(Rat(1, 4))}),
                 PvExpr::constant(Rat(1, 2))));
  CHECK(pv_equal(pv_min({p1, p1, p2}), pv_min({p1, p2})));
  CHECK(pv_equal(pv_min({p1}), p1));
  // idempotent
  PvExpr e = pv_min({pv_sum({p1, p2}), PvExpr::constant(Rat(1, 2)), p1});
  CHECK(pv_equal(pv_canon(e), e));
}

TEST_CASE("pv_to_string shapes") {
  PvExpr p1 = PvExpr::variable("p1"), p2 = PvExpr::variable("p2");
  CHECK(pv_to_string(pv_sum({p1, p2})) == "(p1 +. p2)");
  CHECK(pv_to_string(pv_min({p1, p2})) == "min(p1, p2)");
}

TEST_CASE("pv_leq is sound on the provable fragment") {
  PvExpr p1 = PvExpr::variable("p1"), p2 = PvExpr::variable("p2");
  PvExpr sum = pv_sum({p1, p2}), mn = pv_min({p1, p2});
  CHECK(pv_leq(p1, sum));
  CHECK(pv_leq(mn, p1));
  CHECK(pv_leq(mn, sum));
  CHECK(pv_leq(p1, PvExpr::constant(Rat(1))));
  CHECK(pv_leq(sum, pv_sum({p1, p2, PvExpr::variable("p3")})));
  CHECK_FALSE(pv_leq(sum, p1));
  CHECK_FALSE(pv_leq(sum, mn));
  CHECK_FALSE(pv_leq(p1, p2));
  CHECK(pv_leq(PvExpr::constant(Rat(1, 20)), PvExpr::constant(Rat(1, 10))));
  CHECK_FALSE(pv_leq(PvExpr::constant(Rat(1, 10)), PvExpr::constant(Rat(1, 20))));
}

TEST_CASE("pv_leq soundness against random numeric assignments") {
  // Any claim pv_leq proves must hold for every numeric valuation in [0,1].
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(0, 3), var(0, 2), val(0, 20);
  auto gen = [&](auto&& self, int depth) -> PvExpr {
    int k = depth <= 0 ? pick(rng) % 2 : pick(rng);
    switch (k) {
      case 0: return PvExpr::constant(Rat(val(rng), 20));
      case 1: return PvExpr::variable("p" + std::to_string(var(rng)));
      case 2: return pv_sum({self(self, depth - 1), self(self, depth - 1)});
      default: return pv_min({self(self, depth - 1), self(self, depth - 1)});
    }
  };
  auto eval = [&](auto&& self, const PvExpr& e, const std::vector<double>& env) -> double {
    switch (e.kind) {
      case PvKind::Const: return rat_to_double(e.value);
      case PvKind::Var: return env[static_cast<std::size_t>(e.var[1] - '0')];
      case PvKind::Sum: {
        double s = 0;
        for (const auto& a : e.args) s += self(self, a, env);
        return s;
      }
      default: {
        double m = 1e9;
        for (const auto& a : e.args) m = std::min(m, self(self, a, env));
        return m;
      }
    }
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int proved = 0;
  for (int i = 0; i < 500; ++i) {
    PvExpr a = gen(gen, 2), b = gen(gen, 2);
    if (!pv_leq(a, b)) continue;
    ++proved;
    for (int j = 0; j < 50; ++j) {
      std::vector<double> env = {unit(rng), unit(rng), unit(rng)};
      REQUIRE(eval(eval, a, env) <= eval(eval, b, env) + 1e-9);
    }
  }
  CHECK(proved > 20);  // the suite actually exercised the prover
}

TEST_CASE("p-value records reject constants outside [0,1]") {
  CHECK_NOTHROW(PValueRecord::exact(Rat(0)));
  CHECK_NOTHROW(PValueRecord::at_most(Rat(1)));
  CHECK_THROWS_AS(PValueRecord::exact(Rat(3, 2)), std::out_of_range);
  CHECK_THROWS_AS(PValueRecord::at_most(Rat(-1, 10)), std::out_of_range);
}
