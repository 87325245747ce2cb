#include "doctest.h"

#include "optcd/error.hpp"
#include "optcd/spec_parser.hpp"

#include <cmath>

using namespace optcd;

TEST_SUITE("spec_parser") {

TEST_CASE("models") {
    CHECK(parse_model("normal(0,0.2,1)").spec() == "normal(0,0.2,1)");
    CHECK(parse_model(" exponential( 1 , 2 ) ").spec() == "exponential(1,2)");
    CHECK(parse_model("ar1(0.5,0.1,1)").markov_order() == 1);
    CHECK(parse_model("bernoulli(0.5,0.75)").discrete());
    const auto mix = parse_model("mixture(bernoulli(0.5,0.75)@0.4; bernoulli(0.5,0.9)@0.6)");
    CHECK(mix.k_dependent());
    CHECK(parse_model(mix.spec()).spec() == mix.spec());
    CHECK_THROWS_AS(parse_model("gamma(1,2)"), InvalidInput);
    CHECK_THROWS_AS(parse_model("normal(0,1)"), InvalidInput);
    CHECK_THROWS_AS(parse_model("normal(0,1,-1)"), InvalidInput);
}

TEST_CASE("numbers and splitting") {
    CHECK(parse_real("sqrt(2.6645)-1") == doctest::Approx(std::sqrt(2.6645) - 1.0));
    CHECK(parse_real("-1/60") == doctest::Approx(-1.0 / 60.0));
    CHECK(parse_real("2.5e-1") == 0.25);
    CHECK_THROWS(parse_real("abc"));
    const auto parts = split_top("a(1,2), b , c(d(3,4))", ',');
    REQUIRE(parts.size() == 3u);
    CHECK(parts[0] == "a(1,2)");
    CHECK(parts[1] == "b");
    CHECK(parts[2] == "c(d(3,4))");
}

TEST_CASE("pairs and priors") {
    CHECK(parse_pair("M6").id() == PairId::M6);
    CHECK(parse_pair("M5(r=0.5)").params().head_start == 0.5);
    CHECK(parse_prior("geometric(0.1)").kind == Prior::Kind::Geometric);
    CHECK(parse_prior("uniform").kind == Prior::Kind::Uniform);
    CHECK(parse_prior("list(0.5,0.25,0.25)").values.size() == 3u);
    CHECK_THROWS_AS(parse_pair("M5(q=1)"), InvalidInput);
}

TEST_CASE("detectors") {
    const auto c = parse_detector("cusum(2.6601)");
    CHECK(c.name == "cusum");
    CHECK(c.threshold == 2.6601);

    const auto r = parse_detector("cusum_ramp(4.4823, -1/60)");
    REQUIRE(r.args.size() == 2u);
    CHECK(r.args[1] == doctest::Approx(-1.0 / 60.0));

    const auto d = parse_detector("cusum_dynamic(1-40: 2.53; 41-60: 2.53 + 0.506*(k-40))");
    REQUIRE(d.segments.size() == 2u);
    CHECK(d.segments[1].at(50) == doctest::Approx(2.53 + 5.06));
    CHECK(d.segments[0].to == 40);

    const auto s = parse_detector("sr_dynamic(sqrt(2.6645)-1, 1-10: 1.238 + 0.1238*k; 11-60: 0)");
    CHECK(s.args[0] == doctest::Approx(std::sqrt(2.6645) - 1.0));
    CHECK(s.segments[0].at(10) == doctest::Approx(1.238 + 1.238));
    CHECK(s.segments[1].at(30) == 0.0);

    const auto g = parse_detector("ewma(0.1, gamma=40)");
    CHECK(g.gamma == 40.0);
    CHECK_FALSE(g.threshold);

    const auto o = parse_detector("optimal(pair=M5, c=5.5996, rule=equivalent, label=T*5)");
    CHECK(o.pair->id() == PairId::M5);
    CHECK(o.threshold == 5.5996);
    CHECK(o.equivalent_rule);
    CHECK(o.label == "T*5");

    CHECK_THROWS_AS(parse_detector("glr(1)"), InvalidInput);
    CHECK_THROWS_AS(parse_detector("cusum(1, 2)"), InvalidInput);
    CHECK_THROWS_AS(parse_detector("optimal(pair=M6)"), InvalidInput);
    CHECK_THROWS_AS(parse_detector("optimal(pair=M6, c=1, gamma=40)"), InvalidInput);
}

TEST_CASE("build requires a threshold") {
    const auto model = parse_model("normal(0,1,1)");
    CHECK_THROWS_AS(build_detector(parse_detector("cusum_dynamic(1-10: 1; 5-20: 2)"), model, 60), InvalidInput);
    CHECK_THROWS_AS(build_detector(parse_detector("cusum(gamma=40)"), model, 60), ConfigError);
    CHECK(build_detector(parse_detector("cusum(gamma=40)"), model, 60, {}, 3.0).label() == "cusum(3)");
    CHECK_THROWS_AS(make_baseline("optimal(pair=M6, c=1)", model, 60), InvalidInput);
    CHECK_THROWS_AS(build_detector(parse_detector("optimal(pair=M6, file=/nonexistent/limits.txt)"), model, 60),
                    MissingArtifact);
}

}  // TEST_SUITE
