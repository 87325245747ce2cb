#include "doctest.h"

#include "optcd/config.hpp"
#include "optcd/error.hpp"

#include <sstream>
#include <string>

using namespace optcd;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.ini");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("full schema") {
    const auto cfg = parse(R"(# table 1 row
[model]
family = normal
params = 0, 1, 1
x0 = 0

[pair]
id = M6

[detectors]
detector = cusum(11.4423)
detector = ewma(0.1, gamma=40)   # calibrated
detector = optimal(pair=M6, gamma=40)

[run]
horizon = 60
reps = 20000
seed = 7
workers = 1
targets = 20, 40
measures = M5(r=0), M6
tolerance = 0.001
delays = true
profiles = false

[grid]
y_knots = 256
x_knots = 65
quad_nodes = 32

[output]
dir = out/t1
)");
    CHECK(cfg.model().spec() == "normal(0,1,1)");
    CHECK(cfg.pair().id() == PairId::M6);
    CHECK(cfg.detectors.size() == 3u);
    CHECK(cfg.horizon == 60);
    CHECK(cfg.reps == 20000);
    CHECK(cfg.seed == 7u);
    CHECK(cfg.targets == std::vector<double>{20.0, 40.0});
    CHECK(cfg.measure_pairs().size() == 2u);
    CHECK(cfg.tolerance == 0.001);
    CHECK(cfg.delays);
    CHECK_FALSE(cfg.profiles);
    CHECK(cfg.grid.y_knots == 256);
    CHECK(cfg.grid.x_knots == 65);
    CHECK(cfg.out_dir == "out/t1");
}

TEST_CASE("defaults and pair fallbacks") {
    const auto cfg = parse("[model]\nfamily = exponential\nparams = 1, 2\n[pair]\nid = M5\n");
    CHECK(cfg.horizon == 60);
    CHECK(cfg.reps == 100000);
    CHECK(cfg.pair().label() == "M5(r=0)");
    CHECK(cfg.measure_pairs().size() == 1u);
    const auto none = parse("[model]\nfamily = normal\nparams = 0, 1, 1\n");
    CHECK(none.measure_pairs().empty());
    CHECK_THROWS_AS(none.pair(), ConfigError);
}

TEST_CASE("line-anchored diagnostics") {
    CHECK(error_of("[model]\nfamily = normal\ncolour = red\n").find("test.ini:line 3") != std::string::npos);
    CHECK(error_of("[model]\nfamily = normal\nfamily = ar1\n").find("line 3") != std::string::npos);
    CHECK(error_of("[simulation]\n").find("line 1") != std::string::npos);
    CHECK(error_of("horizon = 5\n").find("line 1") != std::string::npos);
    CHECK(error_of("[run]\nhorizon\n").find("line 2") != std::string::npos);
    CHECK(error_of("[run]\nreps = many\n").find("line 2") != std::string::npos);
    CHECK(error_of("[pair]\nid = M12\n").find("line 2") != std::string::npos);
    CHECK(error_of("[run]\ndelays = maybe\n").find("line 2") != std::string::npos);
    CHECK(error_of("; note\n[model]\nfamily = normal\nparams = 0, 1, 1\n[run]\nseed = 3 # inline\n").empty());
}

TEST_CASE("missing file") { CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), MissingArtifact); }

}  // TEST_SUITE
