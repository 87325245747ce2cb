#include "doctest.h"

#include "optcd/error.hpp"
#include "optcd/spec_parser.hpp"
#include "optcd/weights.hpp"

#include <cmath>
#include <vector>

using namespace optcd;

namespace {

WeightState at(int k, int N, double y = 0.0, const std::vector<double>* hist = nullptr) {
    static const std::vector<double> zeros(128, 0.0);
    const auto& h = hist ? *hist : zeros;
    return {k, N, y, std::span<const double>(h.data(), k)};
}

}  // namespace

TEST_SUITE("weights") {

TEST_CASE("M2 puts delay weight on k = 1 and survival weight on N + 1") {
    const auto m = WeightedPair::builtin(PairId::M2);
    const int N = 10;
    CHECK(m.w(at(1, N)) == 1.0);
    CHECK(m.w(at(5, N)) == 0.0);
    CHECK(m.v(at(N + 1, N)) == 1.0);
    for (int j = 1; j <= N; ++j) CHECK(m.v(at(j, N)) == 0.0);
}

TEST_CASE("M4 and M6 read the previous statistic") {
    const auto m4 = WeightedPair::builtin(PairId::M4);
    CHECK(m4.w(at(3, 10, 1.5)) == 0.0);
    CHECK(m4.w(at(3, 10, 0.25)) == doctest::Approx(0.75));
    CHECK(m4.v(at(3, 10, 0.25)) == doctest::Approx(0.75));
    const auto m6 = WeightedPair::builtin(PairId::M6);
    CHECK(m6.w(at(3, 10, 0.25)) == doctest::Approx(0.75));
    CHECK(m6.v(at(3, 10, 0.25)) == 1.0);
    CHECK(m6.v(at(3, 10, 7.0)) == 1.0);
}

TEST_CASE("M5 with head start") {
    const auto m0 = WeightedPair::builtin(PairId::M5, {{}, 0.0});
    CHECK(m0.w(at(1, 60)) == 1.0);
    CHECK(m0.w(at(7, 60)) == 1.0);
    const auto m = WeightedPair::builtin(PairId::M5, {{}, 0.633});
    CHECK(m.w(at(1, 60)) == doctest::Approx(1.633));
    CHECK(m.v(at(1, 60)) == doctest::Approx(1.633));
    CHECK(m.v(at(2, 60)) == 1.0);
    CHECK_THROWS(WeightedPair::builtin(PairId::M5, {{}, -1.0}));
}

TEST_CASE("M7 and M8 read observations") {
    const auto m7 = WeightedPair::builtin(PairId::M7);
    std::vector<double> h{0.0, 0.0, 1.0};
    CHECK(m7.w(at(1, 10, 0.0, &h)) == 1.0);
    CHECK(m7.v(at(1, 10, 0.0, &h)) == 1.0);
    CHECK(m7.w(at(2, 10, 0.0, &h)) == doctest::Approx(0.5));
    CHECK(m7.v(at(3, 10, 0.0, &h)) == doctest::Approx(std::exp(1.0) / (1.0 + std::exp(1.0))));
    const auto m8 = WeightedPair::builtin(PairId::M8);
    CHECK(m8.w(at(3, 10, 0.0, &h)) == doctest::Approx((1.0 + std::exp(1.0)) / 2.0));
    CHECK(m8.v(at(3, 10, 0.0, &h)) == 1.0);
    CHECK(m8.order() == kNonMarkov);
    CHECK_FALSE(m8.equivalent_limit_hypotheses());
}

TEST_CASE("M1 and M3 priors sum to one") {
    const int N = 12;
    for (const char* text : {"M1", "M1(prior=geometric(0.1))", "M3(prior=uniform)"}) {
        const auto m = parse_pair(text);
        double s = 0.0;
        for (int k = 1; k <= N + 1; ++k) {
            const double r = m.v(at(k, N));
            CHECK(r >= 0.0);
            s += r;
        }
        CHECK(s == doctest::Approx(1.0));
    }
    const auto m1 = WeightedPair::builtin(PairId::M1);
    CHECK(m1.w(at(4, N)) == doctest::Approx(1.0 / (N + 1)));
    const auto m3 = WeightedPair::builtin(PairId::M3);
    CHECK(m3.w(at(1, N)) == 1.0);
    CHECK(m3.w(at(2, N)) == 0.0);
    CHECK_THROWS(parse_pair("M1(prior=list(0.5,0.6))").v(at(1, 1)));
}

TEST_CASE("weights are nonnegative") {
    std::vector<double> h(61);
    for (int i = 0; i < 61; ++i) h[i] = std::sin(i * 1.7) * 3.0;
    for (int id = 1; id <= 8; ++id) {
        const auto m = WeightedPair::builtin(static_cast<PairId>(id), {{}, id == 5 ? std::optional(0.5) : std::nullopt});
        for (int k = 1; k <= 60; ++k)
            for (double y : {0.0, 0.3, 1.0, 5.0}) {
                CHECK(m.w(at(k, 60, y, &h)) >= 0.0);
                CHECK(m.v(at(k, 60, y, &h)) >= 0.0);
            }
    }
}

TEST_CASE("pair ids parse and print") {
    CHECK(parse_pair_id("M6") == PairId::M6);
    CHECK(to_string(PairId::M2) == "M2");
    CHECK_THROWS(parse_pair_id("M9"));
    CHECK(parse_pair("M5(r=0)").label() == "M5(r=0)");
}

}  // TEST_SUITE
