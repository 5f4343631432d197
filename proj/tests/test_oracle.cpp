#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "defaultdp/json_io.hpp"
#include "defaultdp/oracle.hpp"
#include "support/generators.hpp"

using namespace defaultdp;

namespace {

DefaultTheory theoryD1() { return parseTheory("T : a / a | b.\nT : ~a / ~b."); }
DefaultTheory theoryD2() {
    return parseTheory("c : a / a | b.\nc : ~a / ~b.\nT : c / c.\nT : ~c / ~c.");
}

}  // namespace

TEST_CASE("alpha-satisfiability") {
    DefaultTheory d2 = theoryD2();
    CHECK(isAlphaSat(d2, 0, {3}));  // conclusions {~c} with ~c: satisfiable

    // prerequisite T: the negation is unsatisfiable
    DefaultTheory d1 = theoryD1();
    CHECK_FALSE(isAlphaSat(d1, 0, {}));
    CHECK_FALSE(isAlphaSat(d1, 0, {1}));

    // prerequisite F: always alpha-satisfiable in the empty set
    DefaultTheory t = parseTheory("F : a / a.");
    CHECK(isAlphaSat(t, 0, {}));
}

TEST_CASE("beta-satisfiability") {
    DefaultTheory d2 = theoryD2();
    CHECK(isBetaSat(d2, 2, {3}));  // {~c, c} unsatisfiable

    DefaultTheory top = parseTheory("a : T / a.");
    CHECK_FALSE(isBetaSat(top, 0, {}));  // justification T with consistent set

    DefaultTheory bot = parseTheory("a : F / a.");
    CHECK(isBetaSat(bot, 0, {}));
    CHECK(isBetaSat(bot, 0, {0}));
}

TEST_CASE("satisfying default sets") {
    CHECK(isSatisfyingDefaultSet(theoryD2(), {3}));
    CHECK_FALSE(isSatisfyingDefaultSet(theoryD1(), {}));

    // every rule concluding: vacuously satisfying
    testgen::Rng rng(808);
    for (int i = 0; i < 20; ++i) {
        DefaultTheory t = testgen::randomTheory(rng, 4, 4, 2);
        std::vector<int> all;
        for (int d = 0; d < t.size(); ++d) all.push_back(d);
        CHECK(isSatisfyingDefaultSet(t, all));
    }
}

TEST_CASE("stable default sets of the running examples") {
    CHECK(stableDefaultSets(theoryD1()).empty());

    auto d2Sets = stableDefaultSets(theoryD2());
    REQUIRE(d2Sets.size() == 1);
    CHECK(d2Sets[0] == std::vector<int>{3});

    auto emptySets = stableDefaultSets(DefaultTheory{});
    REQUIRE(emptySets.size() == 1);
    CHECK(emptySets[0].empty());
}

TEST_CASE("fixed-point check") {
    ReiterResult ok = reiterCheck(theoryD2(), {3});
    CHECK(ok.accepted);
    CHECK(ok.generatingDefaults == std::vector<int>{3});

    // D1 with only the first rule concluding: the operator also fires the
    // second rule, so the closure overshoots
    ReiterResult bad = reiterCheck(theoryD1(), {0});
    CHECK_FALSE(bad.accepted);

    ReiterResult empty = reiterCheck(DefaultTheory{}, {});
    CHECK(empty.accepted);

    // inconsistent conclusions are rejected outright
    DefaultTheory contra = parseTheory("T : T / a & ~a.");
    CHECK_FALSE(reiterCheck(contra, {0}).accepted);
}

TEST_CASE("cross validation agrees on the examples") {
    OracleReport r1 = crossValidate(theoryD1());
    CHECK(r1.agree);
    CHECK(r1.stableSets.empty());

    OracleReport r2 = crossValidate(theoryD2());
    CHECK(r2.agree);
    REQUIRE(r2.stableSets.size() == 1);
    CHECK(r2.stableSets[0] == std::vector<int>{3});
    REQUIRE(r2.reiterConfirmed.size() == 1);
    CHECK(r2.reiterConfirmed[0]);
}

TEST_CASE("both characterizations agree on random theories") {
    testgen::Rng rng(909);
    for (int i = 0; i < 100; ++i) {
        DefaultTheory t = testgen::randomTheory(rng, 4, 4, 3);
        OracleReport r = crossValidate(t);
        INFO(r.firstCounterexample);
        CHECK(r.agree);
    }
}

TEST_CASE("adding a rule keeps re-satisfying sets satisfying") {
    testgen::Rng rng(1010);
    for (int i = 0; i < 40; ++i) {
        DefaultTheory t = testgen::randomTheory(rng, 4, 4, 2);
        auto satisfying = satisfyingDefaultSets(t);

        std::vector<Default> extended = t.defaults();
        Default extra;
        extra.prerequisite = Formula::top();
        extra.justification = Formula::top();
        extra.conclusion = Formula::top();
        extended.push_back(extra);
        DefaultTheory t2(std::move(extended));

        auto satisfying2 = satisfyingDefaultSets(t2);
        for (const auto& s : satisfying) {
            // recompute the three-way test in the larger theory; if it
            // still passes, the set must be listed there as well
            if (isSatisfyingDefaultSet(t2, s))
                CHECK(std::find(satisfying2.begin(), satisfying2.end(), s) != satisfying2.end());
        }
    }
}

TEST_CASE("disagreement reporting carries a counterexample") {
    // negative control for the report plumbing: a fabricated disagreement
    // must surface the flag and the witness in the emitted report
    OracleReport fake;
    fake.stableSets = {{0}};
    fake.reiterConfirmed = {false};
    fake.agree = false;
    fake.firstCounterexample = "stable default set {d1} fails the fixed-point check";
    json out = oracleReportToJson(fake);
    CHECK(out["agree"] == false);
    CHECK(out["first_counterexample"].get<std::string>().find("d1") != std::string::npos);
    CHECK(out["stable_sets"] == json::parse("[[1]]"));
}

TEST_CASE("oracle refuses beyond its caps") {
    std::vector<Default> many;
    for (int i = 0; i < 17; ++i) {
        Default d;
        d.prerequisite = Formula::top();
        d.justification = Formula::top();
        d.conclusion = Formula::var("x");
        many.push_back(d);
    }
    DefaultTheory big(std::move(many));
    CHECK_THROWS_AS(stableDefaultSets(big), ResourceLimitError);

    OracleLimits raised;
    raised.maxDefaults = 20;
    CHECK_NOTHROW(stableDefaultSets(big, raised));
}
