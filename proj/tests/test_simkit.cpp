#include "doctest.h"

#include "optcd/error.hpp"
#include "optcd/simkit.hpp"
#include "optcd/spec_parser.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

using namespace optcd;

namespace {

bool same(const Estimate& a, const Estimate& b) { return a.value == b.value && a.se == b.se && a.n == b.n; }

double combined(const Estimate& a, const Estimate& b) { return std::sqrt(a.se * a.se + b.se * b.se); }

Detector optimal_for(const ObservationModel& model, const WeightedPair& pair, double c, int N) {
    GridSpec g;
    g.y_knots = 256;
    g.workers = 1;
    return make_optimal(model, pair, std::make_shared<const ValueGrid>(backward_limits(model, pair, c, N, g)));
}

}  // namespace

TEST_SUITE("simkit") {

TEST_CASE("never alarming gives N + 1") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const Detector never("never", StatisticKernel::cusum(n),
                         LimitSchedule::constant(std::numeric_limits<double>::infinity()));
    const auto m5 = WeightedPair::builtin(PairId::M5, {{}, 0.0});
    const auto e = estimate_arl0(never, m5, n, 60, 500, 1, 1);
    CHECK(e.value == 61.0);
    CHECK(e.se == 0.0);
    const auto m2 = estimate_arl0(never, WeightedPair::builtin(PairId::M2), n, 60, 500, 1, 1);
    CHECK(m2.value == 1.0);
}

TEST_CASE("alarming at once gives zero delay") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const Detector zero("zero", StatisticKernel::cusum(n), LimitSchedule::constant(0.0));
    const auto m5 = WeightedPair::builtin(PairId::M5, {{}, 0.0});
    CHECK(estimate_garl_direct(zero, m5, n, 30, 200, 1, 1).value == 0.0);
    CHECK(estimate_arl0(zero, m5, n, 30, 200, 1, 1).value == 1.0);
}

TEST_CASE("M2 in-control measure is a survival probability") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const auto d = make_baseline("cusum(11.4423)", n, 60);
    const auto e = estimate_arl0(d, WeightedPair::builtin(PairId::M2), n, 60, 5000, 3, 1);
    CHECK(e.value >= 0.0);
    CHECK(e.value <= 1.0);
}

TEST_CASE("worker count does not change results") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const auto d = make_baseline("cusum(4.4823)", n, 60);
    const std::vector<WeightedPair> ms{WeightedPair::builtin(PairId::M5, {{}, 0.0}), WeightedPair::builtin(PairId::M6)};
    SimOptions o;
    o.reps = 3000;
    o.seed = 99;
    o.delays = true;
    o.block = 256;
    o.workers = 1;
    const auto a = simulate(d, n, ms, 60, o);
    o.workers = 3;
    const auto b = simulate(d, n, ms, 60, o);
    o.workers = 7;
    const auto c = simulate(d, n, ms, 60, o);
    for (const auto* r : {&b, &c}) {
        CHECK(same(a.arl0, r->arl0));
        CHECK(same(a.p_no_alarm, r->p_no_alarm));
        for (std::size_t i = 0; i < ms.size(); ++i) {
            CHECK(same(a.measures[i].gen_arl0, r->measures[i].gen_arl0));
            CHECK(same(a.measures[i].garl_direct, r->measures[i].garl_direct));
            CHECK(same(a.measures[i].garl_identity, r->measures[i].garl_identity));
        }
        for (std::size_t k = 0; k < a.delays->lorden.size(); ++k) {
            CHECK(same(a.delays->lorden[k], r->delays->lorden[k]));
            CHECK(same(a.delays->pollak[k], r->delays->pollak[k]));
        }
    }
    std::ostringstream sa, sb;
    write_report_rows(sa, a, true);
    write_report_rows(sb, b, true);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("identity and direct estimators agree") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    for (auto id : {PairId::M2, PairId::M6}) {
        const auto pair = WeightedPair::builtin(id);
        const auto d = optimal_for(n, pair, id == PairId::M2 ? 0.5 : 2.0, 30);
        SimOptions o;
        o.reps = 20000;
        o.seed = 5;
        o.workers = 1;
        const auto r = simulate(d, n, std::span(&pair, 1), 30, o);
        const auto& m = r.measures[0];
        CHECK(std::abs(m.garl_direct.value - m.garl_identity.value) <= 3.0 * combined(m.garl_direct, m.garl_identity));
    }
}

TEST_CASE("ratio and report layout") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const auto d = make_baseline("cusum(4.4823)", n, 60);
    const auto pair = WeightedPair::builtin(PairId::M5, {{}, 0.0});
    SimOptions o;
    o.reps = 2000;
    o.seed = 8;
    o.workers = 1;
    const auto r = simulate(d, n, std::span(&pair, 1), 60, o);
    const auto& m = r.measures[0];
    CHECK(m.j_ratio.value == doctest::Approx(m.garl_direct.value / m.gen_arl0.value));
    CHECK(m.gen_arl0.value == r.arl0.value);
    std::ostringstream out;
    write_report_header(out);
    write_report_rows(out, r);
    const auto text = out.str();
    CHECK(text.rfind("detector,metric,estimate,stderr,reps,seed\n", 0) == 0);
    CHECK(text.find("garl_direct[M5(r=0)]") != std::string::npos);
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("plain") == "plain");
}

TEST_CASE("delay profiles") {
    const ObservationModel n(IIDNormalShift{0.0, 0.2, 1.0});
    const auto cu = make_baseline("cusum(2.6601)", n, 60);
    const auto p = delay_profiles(cu, n, 60, 4000, 11, 1);
    CHECK(p.conditioned);
    REQUIRE(p.lorden.size() == 60u);
    REQUIRE(p.pollak.size() == 60u);
    CHECK(p.lorden_argmax >= 1);
    for (const auto& e : p.lorden)
        if (e.n > 0) CHECK(e.value >= 0.0);
    // Delays shrink towards the horizon.
    CHECK(p.lorden[59].value <= 1.0);
    CHECK(p.lorden[0].value > p.lorden[49].value);

    const auto ew = make_baseline("ewma(0.1, 0.3)", n, 60);
    const auto q = delay_profiles(ew, n, 60, 2000, 11, 1);
    CHECK_FALSE(q.conditioned);

    // Without survivors past k the Pollak entries are undefined and skipped.
    const Detector zero("zero", StatisticKernel::cusum(n), LimitSchedule::constant(0.0));
    const auto z = delay_profiles(zero, n, 10, 1500, 1, 1);
    CHECK(z.pollak_argmax == 1);
    CHECK(z.pollak_undefined.size() == 9u);
}

TEST_CASE("argument checks") {
    const ObservationModel n(IIDNormalShift{0.0, 1.0, 1.0});
    const auto d = make_baseline("cusum(4.4823)", n, 60);
    SimOptions o;
    o.reps = 0;
    CHECK_THROWS_AS(simulate(d, n, {}, 60, o), InvalidInput);
    o.reps = 10;
    o.direct = false;
    o.delays = true;
    CHECK_THROWS_AS(simulate(d, n, {}, 60, o), InvalidInput);
    o.delays = false;
    CHECK_THROWS_AS(simulate(d, n, {}, 1, o), InvalidInput);
}

}  // TEST_SUITE
