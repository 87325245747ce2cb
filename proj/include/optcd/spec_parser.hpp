#pragma once

#include "optcd/detectors.hpp"
#include "optcd/obs_models.hpp"
#include "optcd/weights.hpp"

#include <optional>
#include <string>
#include <vector>

namespace optcd {

// Model grammar: normal(mu0,mu1,sigma) | exponential(l0,l1) | ar1(rho0,rho1,sd)
//              | bernoulli(p0,p1) | mixture(BASE@prob; BASE@prob; ...)
Family parse_family(const std::string& text);
ObservationModel parse_model(const std::string& text, double x0 = 0.0);

// "uniform" | "geometric(q)" | "list(r1,...,r_{N+1})"
Prior parse_prior(const std::string& text);

// "M6", "M5(r=0)", "M1(prior=geometric(0.05))"
WeightedPair parse_pair(const std::string& text);

// Parsed detector description. Grammar (whitespace ignored):
//   cusum(c)                cusum_ramp(c, s)        cusum_dynamic(SEG; SEG; ...)
//   ewma(lambda, h)         sr(r, c)                sr_dynamic(r, SEG; SEG; ...)
//   shiryaev(c[, prior=P])  optimal(pair=M, c=C | gamma=G | file=PATH[, rule=grid|equivalent])
// A threshold may be written gamma=G to request calibration; s accepts "-1/60".
// SEG is "lo-hi: a", "lo-hi: a + b*k" or "lo-hi: a + b*(k - m)".
// Any detector accepts a trailing label=TEXT.
struct DetectorSpec {
    std::string text;
    std::string name;
    std::string label;
    std::vector<double> args;
    std::vector<Segment> segments;
    std::optional<double> threshold;  // the calibratable constant when given
    std::optional<double> gamma;      // calibration target in place of the threshold
    // optimal(...)
    std::optional<WeightedPair> pair;
    std::string file;
    bool equivalent_rule = false;
    Prior prior;
};

DetectorSpec parse_detector(const std::string& text);

// Builds a detector whose threshold is known. `threshold` overrides the spec's
// (used by calibration). Optimal detectors compute or load their limits.
Detector build_detector(const DetectorSpec& spec, const ObservationModel& model, int horizon,
                        const GridSpec& grid = {}, std::optional<double> threshold = std::nullopt);

// Baselines only: cusum, cusum_ramp, cusum_dynamic, ewma, sr, sr_dynamic, shiryaev.
Detector make_baseline(const std::string& text, const ObservationModel& model, int horizon);

// Splits on `sep` outside parentheses; trims whitespace.
std::vector<std::string> split_top(const std::string& text, char sep);
double parse_real(const std::string& text);

}  // namespace optcd
