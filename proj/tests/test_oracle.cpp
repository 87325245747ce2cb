#include "doctest.h"

#include "optcd/error.hpp"
#include "optcd/oracle.hpp"

using namespace optcd;

TEST_SUITE("oracle") {

TEST_CASE("exhaustive, backward induction and T* coincide") {
    const IIDBernoulli model{0.5, 0.75};
    for (auto pair : {WeightedPair::builtin(PairId::M2), WeightedPair::builtin(PairId::M5, {{}, 0.0}),
                      WeightedPair::builtin(PairId::M6)}) {
        for (const Rational& c : {Rational(1, 4), Rational(1), Rational(4)}) {
            const auto r = oracle_optimal(model, pair, c, 3);
            REQUIRE(r.exhaustive);
            CHECK(*r.exhaustive == r.dp_min);
            CHECK(r.tstar_value == r.dp_min);
            CHECK(r.tstar_dominates);
            CHECK(r.enumerated == 676u);
        }
    }
}

TEST_CASE("zero c stops at once with value zero") {
    const auto r = oracle_optimal({0.5, 0.75}, WeightedPair::builtin(PairId::M6), Rational(0), 3);
    CHECK(r.dp_min == 0);
    CHECK(*r.exhaustive == 0);
    CHECK(r.tstar_value == 0);
}

TEST_CASE("every pair M1 to M6 on N = 2 and N = 4") {
    for (int id = 1; id <= 6; ++id) {
        const auto pair = WeightedPair::builtin(static_cast<PairId>(id), {{}, id == 5 ? std::optional(0.5) : std::nullopt});
        const auto r2 = oracle_optimal({0.4, 0.8}, pair, Rational(3, 2), 2);
        CHECK(*r2.exhaustive == r2.dp_min);
        CHECK(r2.tstar_value == r2.dp_min);
        const auto r4 = oracle_optimal({0.5, 0.75}, pair, Rational(2), 4);
        CHECK_FALSE(r4.exhaustive);
        CHECK(r4.tstar_value == r4.dp_min);
    }
}

TEST_CASE("exact measures obey the identity") {
    const BernoulliTree tree({0.5, 0.75}, WeightedPair::builtin(PairId::M6), 3);
    const Rational c(1);
    const auto rule = tstar_rule(tree, c);
    const auto m = exact_measures(tree, rule, c);
    CHECK(m.garl == m.garl_identity);
    CHECK(m.lagrangian == m.garl_identity - c * m.gen_arl0);
    const auto never = exact_measures(tree, [](int, std::uint32_t) { return false; }, c);
    CHECK(never.gen_arl0 == 4);
    CHECK(never.garl == never.garl_identity);
}

TEST_CASE("exact limits at the boundary") {
    const BernoulliTree tree({0.5, 0.75}, WeightedPair::builtin(PairId::M2), 3);
    CHECK(tree.limit(Rational(2), 4, Rational(1)) == 0);
    CHECK(tree.limit(Rational(2), 3, Rational(5)) == 2);
    CHECK(tree.lambda(1) == Rational(3, 2));
    CHECK(tree.lambda(0) == Rational(1, 2));
    CHECK(to_rational(0.25) == Rational(1, 4));
}

TEST_CASE("rejected inputs") {
    CHECK_THROWS_AS(oracle_optimal({0.5, 0.75}, WeightedPair::builtin(PairId::M2), Rational(1), 5), InvalidInput);
    CHECK_THROWS_AS(oracle_optimal({0.5, 0.75}, WeightedPair::builtin(PairId::M2), Rational(-1), 3), InvalidInput);
    CHECK_THROWS_AS(oracle_optimal({0.5, 0.75}, WeightedPair::builtin(PairId::M7), Rational(1), 3),
                    UnsupportedConfiguration);
}

}  // TEST_SUITE
