#pragma once

#include "optcd/limits.hpp"
#include "optcd/obs_models.hpp"
#include "optcd/weights.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace optcd {

// Sectioned key = value file. '#' and ';' start comments. Schema:
//   [model]     family = normal|exponential|ar1|bernoulli   params = a, b[, c]   x0 = 0
//   [pair]      id = M1..M8   prior = uniform|geometric(q)|list(...)   r = 0
//   [detectors] detector = SPEC            (repeatable, see parse_detector)
//   [run]       horizon  reps  seed  workers  targets = g1, g2  c  measures = M5(r=0), M6
//               tolerance  delays = true|false  profiles = true|false
//   [grid]      y_knots  y_min  y_max  x_knots  x_sds  quad_nodes  fp_tol
//   [output]    dir
// A mixture model is written family = mixture with params = BASE@p; BASE@p.
struct ExperimentConfig {
    std::string family;
    std::string params;
    double x0 = 0.0;

    std::optional<PairId> pair_id;
    std::string prior;
    std::optional<double> head_start;

    std::vector<std::string> detectors;

    int horizon = 60;
    std::int64_t reps = 100000;
    std::uint64_t seed = 1;
    int workers = 0;
    std::vector<double> targets;
    std::optional<double> c;
    std::vector<std::string> measures;
    double tolerance = 0.005;
    bool delays = false;
    bool profiles = false;

    GridSpec grid;
    std::string out_dir = ".";

    ObservationModel model() const;
    // Throws ConfigError when [pair] is absent.
    WeightedPair pair() const;
    // [run] measures, else the [pair] pair, else none.
    std::vector<WeightedPair> measure_pairs() const;
};

// Errors are ConfigError with a "SOURCE:line N:" prefix.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "config");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace optcd
