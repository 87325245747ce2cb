#include "doctest.h"

#include "optcd/detectors.hpp"
#include "optcd/error.hpp"
#include "optcd/limits.hpp"
#include "optcd/oracle.hpp"
#include "optcd/random.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

using namespace optcd;

namespace {

GridSpec small_grid() {
    GridSpec g;
    g.y_knots = 128;
    g.x_knots = 33;
    g.quad_nodes = 32;
    g.workers = 1;
    return g;
}

void check_boundaries(const ObservationModel& model, const WeightedPair& pair, double c, int N, const GridSpec& spec) {
    const auto vg = backward_limits(model, pair, c, N, spec);
    const auto& ax = vg.axes();
    const std::size_t nx = std::max<std::size_t>(ax.x.size(), 1);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        const double x = ax.x.empty() ? model.x0() : ax.x[ix];
        for (std::size_t iy = 0; iy < ax.y.size(); ++iy) {
            CHECK(vg.node(N + 1, ix, iy) == 0.0);
            std::vector<double> hist(N + 1, x);
            const double v = pair.v({N + 1, N, ax.y[iy], std::span<const double>(hist.data(), N + 1)});
            CHECK(vg.node(N, ix, iy) == c * v);
            for (int n = 0; n <= N; ++n) CHECK(vg.node(n, ix, iy) >= 0.0);
        }
    }
}

}  // namespace

TEST_SUITE("limits") {

TEST_CASE("boundary rows") {
    const auto spec = small_grid();
    check_boundaries(ObservationModel(IIDNormalShift{0.0, 1.0, 1.0}), WeightedPair::builtin(PairId::M6), 2.0, 10,
                     spec);
    check_boundaries(ObservationModel(IIDNormalShift{0.0, 1.0, 1.0}), WeightedPair::builtin(PairId::M4), 1.5, 10,
                     spec);
    check_boundaries(ObservationModel(AR1CorrShift{0.5, 0.1, 1.0}), WeightedPair::builtin(PairId::M5, {{}, 0.0}), 3.0,
                     8, spec);
    check_boundaries(ObservationModel(IIDBernoulli{0.5, 0.75}), WeightedPair::builtin(PairId::M2), 1.0, 4, spec);
}

TEST_CASE("M2 last limit equals c") {
    const auto vg = backward_limits(ObservationModel(IIDExponentialRate{1.0, 2.0}), WeightedPair::builtin(PairId::M2),
                                    1.7, 6, small_grid());
    for (double y : {0.0, 0.01, 1.0, 5.0}) CHECK(vg(6, y) == 1.7);
}

TEST_CASE("zero c gives zero limits") {
    const auto vg = backward_limits(ObservationModel(IIDNormalShift{0.0, 1.0, 1.0}), WeightedPair::builtin(PairId::M6),
                                    0.0, 5, small_grid());
    for (double v : vg.values()) CHECK(v == 0.0);
}

TEST_CASE("limits grow with c") {
    GridSpec spec = small_grid();
    spec.y_max = 500.0;
    for (const auto& [model, pair] :
         {std::pair{ObservationModel(IIDNormalShift{0.0, 1.0, 1.0}), WeightedPair::builtin(PairId::M6)},
          std::pair{ObservationModel(IIDNormalShift{0.0, 1.0, 1.0}), WeightedPair::builtin(PairId::M5, {{}, 0.0})},
          std::pair{ObservationModel(AR1CorrShift{0.5, 0.1, 1.0}), WeightedPair::builtin(PairId::M6)}}) {
        const auto a = backward_limits(model, pair, 1.0, 12, spec);
        const auto b = backward_limits(model, pair, 1.3, 12, spec);
        REQUIRE(a.values().size() == b.values().size());
        for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(a.values()[i] <= b.values()[i]);
    }
}

TEST_CASE("limits are non-increasing in y under the ordering hypotheses") {
    const auto spec = small_grid();
    const ObservationModel model(IIDNormalShift{0.0, 1.0, 1.0});
    for (auto id : {PairId::M2, PairId::M4, PairId::M5, PairId::M6}) {
        const auto pair = WeightedPair::builtin(id, {{}, id == PairId::M5 ? std::optional(0.0) : std::nullopt});
        const auto vg = backward_limits(model, pair, 2.0, 10, spec);
        for (int n = 0; n <= 10; ++n)
            for (std::size_t iy = 1; iy < vg.axes().y.size(); ++iy)
                CHECK(vg.node(n, 0, iy) <= vg.node(n, 0, iy - 1) + 1e-12);
    }
}

TEST_CASE("bernoulli two-step tree against hand enumeration") {
    // p0 = 0.5, p1 = 0.75: Lambda(0) = 0.5, Lambda(1) = 1.5; M2 has w_2 = v_2 = 0 and v_3 = 1.
    const ObservationModel model(IIDBernoulli{0.5, 0.75});
    const auto m2 = WeightedPair::builtin(PairId::M2);
    GridSpec spec = small_grid();
    spec.y_knots = 2048;
    const auto vg = backward_limits(model, m2, 1.0, 2, spec);
    auto exact = [](double y) { return 0.5 * std::max(0.0, 1.0 - 0.5 * y) + 0.5 * std::max(0.0, 1.0 - 1.5 * y); };
    for (double y : {0.5, 1.5})
        CHECK(limit_rhs(model, m2, vg, 1, y, 0.0) == doctest::Approx(exact(y)).epsilon(1e-14));
    // The grid spans [0, 1.05] here; beyond it the limit is zero for y >= 1 anyway.
    for (double y : {0.25, 0.5, 1.0}) CHECK(vg(1, y) == doctest::Approx(exact(y)).epsilon(1e-3));
    const BernoulliTree tree(IIDBernoulli{0.5, 0.75}, m2, 2);
    for (double y : {0.5, 1.5, 0.25})
        CHECK(to_double(tree.limit(1, 1, to_rational(y))) == doctest::Approx(exact(y)).epsilon(1e-15));

    // Equivalent limit: crossing of y and l_1(y) found by a dense scan.
    const auto eq = equivalent_limits(model, m2, vg, 1e-12);
    double lo = 0.0, hi = 4.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (exact(mid) - mid > 0.0 ? lo : hi) = mid;
    }
    double scan = 0.0;
    for (int i = 0; i <= 400000; ++i) {
        const double y = 4.0 * i / 400000.0;
        if (exact(y) - y <= 0.0) {
            scan = y;
            break;
        }
    }
    CHECK(std::abs(scan - lo) <= 1e-5);
    CHECK(eq(1) == doctest::Approx(lo).epsilon(1e-10));
    CHECK(eq(2) == doctest::Approx(1.0));
}

TEST_CASE("equivalent limits: fixed points and residuals") {
    const auto spec = small_grid();
    const ObservationModel model(IIDNormalShift{0.0, 1.0, 1.0});
    const auto m2 = WeightedPair::builtin(PairId::M2);
    const auto vg = backward_limits(model, m2, 2.5, 15, spec);
    const auto eq = equivalent_limits(model, m2, vg, 1e-12);
    CHECK(eq.scalar());
    CHECK(eq(15) == doctest::Approx(2.5));
    for (int n = 1; n <= 15; ++n) {
        const double y = eq(n);
        CHECK(y > 0.0);
        CHECK(std::abs(limit_rhs(model, m2, vg, n, y, 0.0) - y) <= 1e-9);
        // RHS - y changes sign once: positive below, negative above.
        CHECK(limit_rhs(model, m2, vg, n, 0.5 * y, 0.0) - 0.5 * y > 0.0);
        CHECK(limit_rhs(model, m2, vg, n, 2.0 * y, 0.0) - 2.0 * y < 0.0);
    }
}

TEST_CASE("grid rule and equivalent rule stop together") {
    const ObservationModel model(IIDNormalShift{0.0, 1.0, 1.0});
    for (auto id : {PairId::M2, PairId::M6}) {
        const auto pair = WeightedPair::builtin(id);
        auto vg = std::make_shared<const ValueGrid>(backward_limits(model, pair, 2.0, 30, GridSpec{}));
        auto eq = std::make_shared<const EquivalentLimitTable>(equivalent_limits(model, pair, *vg));
        const Detector a = make_optimal(model, pair, vg);
        const Detector b = make_optimal(model, pair, eq);
        int differ = 0;
        const int paths = 10000;
        for (int i = 0; i < paths; ++i) {
            Engine rng = substream(505, i);
            const auto t = sample_path(model, kNoChange, 30, rng);
            differ += a.run(t).T != b.run(t).T;
        }
        CHECK(differ <= paths / 1000);
    }
}

TEST_CASE("unsupported configurations") {
    const ObservationModel n(IIDNormalShift{});
    CHECK_THROWS_AS(backward_limits(n, WeightedPair::builtin(PairId::M8), 1.0, 5, small_grid()),
                    UnsupportedConfiguration);
    const ObservationModel mix(MixturePost{{{IIDNormalShift{0.0, 1.0, 1.0}, 0.5}, {IIDNormalShift{0.0, 2.0, 1.0}, 0.5}}});
    CHECK_THROWS_AS(backward_limits(mix, WeightedPair::builtin(PairId::M2), 1.0, 5, small_grid()),
                    UnsupportedConfiguration);
    CHECK_THROWS_AS(backward_limits(n, WeightedPair::builtin(PairId::M2), -1.0, 5, small_grid()), InvalidInput);
}

TEST_CASE("value grid interpolation clamps outside the knots") {
    const auto vg = backward_limits(ObservationModel(IIDNormalShift{0.0, 1.0, 1.0}), WeightedPair::builtin(PairId::M6),
                                    2.0, 6, small_grid());
    const double ymax = vg.axes().y_max;
    CHECK(vg(3, 10.0 * ymax) == vg(3, ymax));
    CHECK(vg(3, 0.0) == vg.node(3, 0, 0));
}

}  // TEST_SUITE
