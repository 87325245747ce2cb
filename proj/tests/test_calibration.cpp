#include "doctest.h"

#include "optcd/calibration.hpp"
#include "optcd/error.hpp"
#include "optcd/oracle.hpp"
#include "optcd/spec_parser.hpp"

#include <cmath>

using namespace optcd;

TEST_SUITE("calibration") {

TEST_CASE("root of a deterministic increasing function") {
    auto g = [](double c) { return Estimate{c * c, 0.0, 1}; };
    CalibrationOptions o;
    o.tolerance = 1e-6;
    const auto r = calibrate_threshold(g, 4.0, o);
    CHECK(r.converged);
    CHECK(r.c_gamma == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(r.achieved_gamma - 4.0) <= 4e-6);

    o.guess = 7.0;
    const auto from_above = calibrate_threshold(g, 4.0, o);
    CHECK(from_above.converged);
    CHECK(from_above.c_gamma == doctest::Approx(2.0).epsilon(1e-6));
    o.guess = 0.01;
    CHECK(calibrate_threshold(g, 4.0, o).c_gamma == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("bracket failures") {
    CalibrationOptions o;
    auto flat = [](double) { return Estimate{1.0, 0.0, 1}; };
    CHECK_THROWS_AS(calibrate_threshold(flat, 5.0, o), NumericalFailure);
    auto high = [](double c) { return Estimate{10.0 + c, 0.0, 1}; };
    CHECK_THROWS_AS(calibrate_threshold(high, 5.0, o), InvalidInput);
    CHECK_THROWS_AS(calibrate_threshold(flat, -1.0, o), InvalidInput);
}

TEST_CASE("feasible interval") {
    const auto model = parse_model("normal(0,1,1)");
    const auto m6 = WeightedPair::builtin(PairId::M6);
    CHECK(first_weight_mean(m6, model, 60) == 1.0);
    SimOptions sim;
    sim.reps = 200;
    sim.workers = 1;
    CHECK(max_generalized_arl0(m6, model, 60, sim).value == 61.0);
    CalibrationOptions o;
    o.sim = sim;
    GridSpec g;
    g.y_knots = 64;
    try {
        calibrate(model, m6, 0.5, 60, g, o);
        FAIL("expected InfeasibleTarget");
    } catch (const InfeasibleTarget& e) {
        CHECK(e.lower() == 1.0);
        CHECK(e.upper() == 61.0);
    }
    CHECK_THROWS_AS(calibrate(model, m6, 70.0, 60, g, o), InfeasibleTarget);
}

TEST_CASE("optimal detector calibrated to a short horizon") {
    const auto model = parse_model("normal(0,1,1)");
    const auto m6 = WeightedPair::builtin(PairId::M6);
    CalibrationOptions o;
    o.sim.reps = 4000;
    o.sim.seed = 3;
    o.sim.workers = 1;
    o.tolerance = 0.01;
    GridSpec g;
    g.y_knots = 128;
    const auto r = calibrate(model, m6, 12.0, 20, g, o);
    CHECK(r.converged);
    CHECK(std::abs(r.achieved_gamma - 12.0) <= 0.12);
    CHECK(r.c_gamma > 0.0);
}

TEST_CASE("baseline threshold calibration") {
    const auto model = parse_model("normal(0,1,1)");
    const auto m5 = WeightedPair::builtin(PairId::M5, {{}, 0.0});
    CalibrationOptions o;
    o.sim.reps = 4000;
    o.sim.seed = 4;
    o.sim.workers = 1;
    o.tolerance = 0.01;
    const auto r = calibrate_detector(parse_detector("cusum(gamma=20)"), model, m5, 20.0, 60, o);
    CHECK(r.converged);
    CHECK(std::abs(r.achieved_gamma - 20.0) <= 0.2);
    CHECK_THROWS_AS(calibrate_detector(parse_detector("cusum_dynamic(1-60: 1)"), model, m5, 20.0, 60, o),
                    InvalidInput);
}

TEST_CASE("value formula") {
    const auto model = parse_model("bernoulli(0.5,0.75)");
    const auto m2 = WeightedPair::builtin(PairId::M2);
    GridSpec g;
    g.y_knots = 64;
    const auto zero = backward_limits(model, m2, 0.0, 2, g);
    const auto f0 = value_formula(0.0, 0.5, model, m2, zero, 100, 1);
    CHECK(f0.j == 0.0);
    CHECK(f0.garl_min == 0.0);

    // Exact two-step tree: E_0 (l_1 - Y_1)^+ with Y_1 = Lambda(X_1).
    const BernoulliTree tree(IIDBernoulli{0.5, 0.75}, m2, 2);
    g.y_knots = 4096;
    for (double c : {1.0, 3.0}) {
        const auto vg = backward_limits(model, m2, c, 2, g);
        Rational excess = 0;
        for (int x = 0; x <= 1; ++x) {
            const Rational y1 = tree.lambda(x);
            const Rational l1 = tree.limit(to_rational(c), 1, y1);
            if (l1 > y1) excess += tree.p0(x) * (l1 - y1);
        }
        const auto f = value_formula(c, 0.5, model, m2, vg, 2000, 7);
        CHECK(f.excess == doctest::Approx(to_double(excess)).epsilon(1e-5));
        CHECK(std::abs(f.excess_mc.value - f.excess) <= 4.0 * f.excess_mc.se + 1e-12);
        // v_1 = 0 for M2.
        CHECK(f.j == doctest::Approx(c - f.excess / 0.5));
        CHECK(f.garl_min == doctest::Approx(c * 0.5 - f.excess));
    }
}

}  // TEST_SUITE
