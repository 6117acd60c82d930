#include <sstream>

#include <catch_amalgamated.hpp>

#include "bhl/binder.hpp"
#include "bhl/numstat.hpp"
#include "bhl/parser.hpp"

using namespace bhl;

namespace {

// Reference values frozen from scipy.stats.t.sf (scipy 1.15.3):
// p = 2 * sf(t, df).
struct GridPoint {
  double df, t, p;
};
constexpr GridPoint kGrid[] = {
    {1, 0.0, 1.0},
    {1, 0.5, 0.7048327646991336},
    {1, 1.0, 0.49999999999999956},
    {1, 2.0, 0.2951672353008664},
    {1, 5.0, 0.12566591637800234},
    {2, 0.0, 1.0},
    {2, 0.5, 0.6666666666666667},
    {2, 1.0, 0.42264973081037427},
    {2, 2.0, 0.1835034190722739},
    {2, 5.0, 0.037749551350623724},
    {5, 0.0, 1.0},
    {5, 0.5, 0.638298871640929},
    {5, 1.0, 0.36321746764912255},
    {5, 2.0, 0.10193947882985828},
    {5, 5.0, 0.0041047159800533225},
    {10, 0.0, 1.0},
    {10, 0.5, 0.6278936057429729},
    {10, 1.0, 0.3408931323020601},
    {10, 2.0, 0.07338803477074039},
    {10, 5.0, 0.0005373336027564525},
    {30, 0.0, 1.0},
    {30, 0.5, 0.6207230048851273},
    {30, 1.0, 0.32530861542602985},
    {30, 2.0, 0.0546250449629831},
    {30, 5.0, 2.3296685467007786e-05},
    {100, 0.0, 1.0},
    {100, 0.5, 0.6181735658308867},
    {100, 1.0, 0.3197241557841236},
    {100, 2.0, 0.04821217873113364},
    {100, 5.0, 2.450173413503798e-06},
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("two-sided t p-value matches the reference grid within 1e-8") {
  for (const GridPoint& g : kGrid) {
    INFO("df=" << g.df << " t=" << g.t);
    CHECK(t_two_sided_pvalue(g.t, g.df) == Catch::Approx(g.p).margin(1e-8));
  }
}

TEST_CASE("t = 0 gives p = 1 exactly") {
  for (double df : {1.0, 2.0, 5.0, 10.0, 30.0, 100.0})
    CHECK(t_two_sided_pvalue(0.0, df) == 1.0);
}

TEST_CASE("one-sided p-values split the two-sided one") {
  for (const GridPoint& g : kGrid) {
    CHECK(t_upper_pvalue(g.t, g.df) + t_upper_pvalue(-g.t, g.df) ==
          Catch::Approx(1.0).margin(1e-10));
    if (g.t > 0)
      CHECK(t_upper_pvalue(g.t, g.df) == Catch::Approx(g.p / 2).margin(1e-8));
  }
}

TEST_CASE("t statistic on a hand-checked sample") {
  // mean 3, sample var 2.5, n = 5 -> t = (3 - 2) / sqrt(2.5 / 5) = sqrt(2)
  std::vector<double> xs = {1, 2, 3, 4, 5};
  CHECK(t_statistic(xs, 2.0) == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
  CHECK_THROWS_AS(t_statistic({1.0}, 0.0), VerifyError);
  CHECK_THROWS_AS(t_statistic({2.0, 2.0, 2.0}, 0.0), VerifyError);
}

TEST_CASE("CSV reader handles ragged columns and rejects junk") {
  std::istringstream ok("a,b\n1,2\n3,\n4,\n");
  DataTable t = read_csv(ok);
  CHECK(t["a"] == std::vector<double>{1, 3, 4});
  CHECK(t["b"] == std::vector<double>{2});

  std::istringstream bad("a\nx\n");
  CHECK_THROWS_AS(read_csv(bad), VerifyError);
  std::istringstream dup("a,a\n1,2\n");
  CHECK_THROWS_AS(read_csv(dup), VerifyError);
}

TEST_CASE("demo evaluation matches scipy on the bundled clinical data") {
  // Frozen from scipy 1.15.3 on data/clinical.csv:
  //   ttest_1samp(d, 1.0, two-sided)            = 0.2219175173060893
  //   ttest_1samp(trial1, 1.0, two-sided)       = 0.4346206941013855
  //   ttest_1samp(trial2, 1.0, two-sided)       = 0.0219862364901483
  //   ttest_ind(d_new, d_drug1, greater)        = 0.034484690103577416
  //   ttest_ind(d_new, d_drug2, greater)        = 0.0453036083414743
  //   ttest_rel(before, after, less)            = 4.346507400707673e-05
  DataTable data = read_csv_file(std::string(DATA_DIR) + "/clinical.csv");

  ProgramAST fig1 = parse(slurp(std::string(CORPUS_DIR) + "/fig1_complete.swl"));
  bind_and_check(fig1);
  DemoReport r1 = run_demo(fig1, fig1.functions[0], data);
  REQUIRE(r1.results.size() == 1);
  CHECK(r1.results[0].second == Catch::Approx(0.2219175173060893).margin(1e-8));

  ProgramAST fig3 = parse(slurp(std::string(CORPUS_DIR) + "/fig3_fixed.swl"));
  bind_and_check(fig3);
  DemoReport r3 = run_demo(fig3, fig3.functions[0], data);
  REQUIRE(r3.results.size() == 3);
  CHECK(r3.results[0].second == Catch::Approx(0.4346206941013855).margin(1e-8));
  CHECK(r3.results[1].second == Catch::Approx(0.0219862364901483).margin(1e-8));
  CHECK(r3.results[2].second ==
        Catch::Approx(0.4346206941013855 + 0.0219862364901483).margin(1e-8));

  ProgramAST fig4 = parse(slurp(std::string(CORPUS_DIR) + "/fig4_multiple_comparison.swl"));
  bind_and_check(fig4);
  DemoReport r4 = run_demo(fig4, fig4.functions[0], data);
  REQUIRE(r4.steps.size() == 2);
  CHECK(r4.steps[0].second.p == Catch::Approx(0.034484690103577416).margin(1e-8));
  CHECK(r4.steps[1].second.p == Catch::Approx(0.0453036083414743).margin(1e-8));

  ProgramAST paired = parse(slurp(std::string(CORPUS_DIR) + "/paired_ttest.swl"));
  bind_and_check(paired);
  DemoReport rp = run_demo(paired, paired.functions[0], data);
  CHECK(rp.results[0].second == Catch::Approx(4.346507400707673e-05).margin(1e-8));
}

TEST_CASE("rank-based group commands report the numeric gap") {
  ProgramAST steel = parse(slurp(std::string(CORPUS_DIR) + "/group_steel.swl"));
  bind_and_check(steel);
  DataTable data;  // never reached
  CHECK_THROWS_WITH(run_demo(steel, steel.functions[0], data),
                    Catch::Matchers::ContainsSubstring("numeric engine not implemented"));
}
