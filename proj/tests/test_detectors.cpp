#include "doctest.h"

#include "optcd/detectors.hpp"
#include "optcd/error.hpp"
#include "optcd/random.hpp"
#include "optcd/simkit.hpp"
#include "optcd/spec_parser.hpp"

#include <cmath>
#include <limits>

using namespace optcd;

namespace {

void check_stopping_invariants(const Detector& d, const Trajectory& t) {
    const auto st = d.run(t);
    const int N = t.horizon();
    REQUIRE(st.T >= 1);
    REQUIRE(st.T <= N + 1);
    const auto path = run_kernel(d.statistic(), t);
    for (int n = 1; n < st.T; ++n) CHECK(path.y[n] < d.schedule().at(n, path.y[n], t.values[n]));
    if (st.T <= N) {
        CHECK(st.alarm_value == path.y[st.T]);
        CHECK(st.alarm_value >= st.alarm_limit);
    }
}

}  // namespace

TEST_SUITE("detectors") {

TEST_CASE("zero limit alarms at once; huge limit never") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const Detector zero("zero", StatisticKernel::cusum(n), LimitSchedule::constant(0.0));
    const Detector never("never", StatisticKernel::cusum(n),
                         LimitSchedule::constant(std::numeric_limits<double>::infinity()));
    for (int i = 0; i < 100; ++i) {
        Engine rng = substream(3, i);
        const auto t = sample_path(n, 1 + i % 20, 20, rng);
        CHECK(zero.run(t).T == 1);
        CHECK(never.run(t).T == 21);
    }
}

TEST_CASE("stopping-time invariants") {
    const ObservationModel n(IIDNormalShift{0.0, 0.2, 1.0});
    const std::vector<Detector> dets{
        make_baseline("cusum(2.6601)", n, 60), make_baseline("cusum_ramp(2.6601, -1/60)", n, 60),
        make_baseline("cusum_dynamic(1-40: 2.53; 41-60: 2.53 + 0.506*(k-40))", n, 60),
        make_baseline("ewma(0.1, 0.3)", n, 60), make_baseline("sr(0.5, 20)", n, 60)};
    for (const auto& d : dets)
        for (int i = 0; i < 300; ++i) {
            Engine rng = substream(17, i);
            check_stopping_invariants(d, sample_path(n, 1 + i % 61, 60, rng));
        }
}

TEST_CASE("flat ramp equals constant CUSUM path by path") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const auto a = make_baseline("cusum(4.4823)", n, 60);
    const auto b = make_baseline("cusum_ramp(4.4823, 0)", n, 60);
    for (int i = 0; i < 2000; ++i) {
        Engine rng = substream(19, i);
        const auto t = sample_path(n, 1 + i % 61, 60, rng);
        CHECK(a.run(t).T == b.run(t).T);
    }
}

TEST_CASE("lower limits stop no later") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const auto lo = make_baseline("cusum_ramp(11.4423, -1/60)", n, 60);
    const auto mid = make_baseline("cusum(11.4423)", n, 60);
    const auto hi = make_baseline("cusum_ramp(11.4423, 1/60)", n, 60);
    for (int i = 0; i < 2000; ++i) {
        Engine rng = substream(23, i);
        const auto t = sample_path(n, 1 + i % 61, 60, rng);
        const int a = lo.run(t).T, b = mid.run(t).T, c = hi.run(t).T;
        CHECK(a <= b);
        CHECK(b <= c);
    }
}

TEST_CASE("schedules") {
    const auto ramp = LimitSchedule::linear_ramp(2.0, -1.0 / 60.0);
    CHECK(ramp.at(30, 0.0, 0.0) == doctest::Approx(1.0));
    CHECK(LimitSchedule::linear_ramp(2.0, -1.0 / 10.0).at(20, 0.0, 0.0) == 0.0);
    const auto pw = LimitSchedule::piecewise({{1, 40, 2.53, 0.0, 0.0}, {41, 60, 2.53, 0.506, 40.0}});
    CHECK(pw.at(40, 0.0, 0.0) == doctest::Approx(2.53));
    CHECK(pw.at(50, 0.0, 0.0) == doctest::Approx(2.53 + 5.06));
    CHECK_THROWS_AS(LimitSchedule::piecewise({{1, 10, 1.0, 0.0, 0.0}, {5, 20, 1.0, 0.0, 0.0}}), InvalidInput);
    const auto gap = LimitSchedule::piecewise({{1, 10, 1.0, 0.0, 0.0}});
    CHECK_THROWS_AS(gap.at(11, 0.0, 0.0), ConfigError);
}

TEST_CASE("piecewise CUSUM reproduces its in-control run length") {
    const ObservationModel n(IIDNormalShift{0.0, 0.2, 1.0});
    const auto d = make_baseline("cusum_dynamic(1-40: 2.53; 41-60: 2.53 + 0.506*(k-40))", n, 60);
    const auto e = estimate_arl0(d, WeightedPair::builtin(PairId::M5, {{}, 0.0}), n, 60, 20000, 4, 1);
    CHECK(std::abs(e.value - 40.02) <= 0.5 + 3.0 * e.se);
}

TEST_CASE("optimal detector rejects a table from another model") {
    const ObservationModel a(IIDNormalShift{0.0, 1.0, 1.0});
    const ObservationModel b(IIDNormalShift{0.0, 0.5, 1.0});
    GridSpec g;
    g.y_knots = 32;
    auto vg = std::make_shared<const ValueGrid>(backward_limits(a, WeightedPair::builtin(PairId::M6), 1.0, 5, g));
    CHECK_THROWS_AS(make_optimal(b, WeightedPair::builtin(PairId::M6), vg), ConfigError);
    CHECK_THROWS_AS(make_optimal(a, WeightedPair::builtin(PairId::M2), vg), ConfigError);
}

}  // TEST_SUITE
