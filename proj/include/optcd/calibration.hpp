#pragma once

#include "optcd/limits.hpp"
#include "optcd/simkit.hpp"
#include "optcd/spec_parser.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace optcd {

struct CalibrationResult {
    double c_gamma = 0.0;
    double achieved_gamma = 0.0;
    double target_gamma = 0.0;
    double mc_stderr = 0.0;
    int iterations = 0;
    bool converged = false;
    double feasible_lo = 0.0;  // E_0 v_1
    double feasible_hi = 0.0;  // sum_j E_0 v_j
};

struct CalibrationOptions {
    double tolerance = 0.005;  // relative to the target
    double c_lo = 0.0;         // g(c_lo) must fall below the target
    double c_hi = 1.0;         // doubled until g(c_hi) reaches the target
    double c_cap = 1048576.0;  // 2^20
    std::optional<double> guess;  // positive starting point; the bracket grows or shrinks around it
    int max_iter = 60;
    SimOptions sim;            // reps and seed shared by every candidate
};

// Root of g(c) = target for a nondecreasing g. The bracket is expanded by
// doubling c_hi (or, from a guess, halving towards c_lo), then narrowed by the
// Illinois variant of false position.
CalibrationResult calibrate_threshold(const std::function<Estimate(double)>& g, double target,
                                      const CalibrationOptions& options);

// Generalized ARL_0 of the pair under a detector that never alarms before N + 1.
Estimate max_generalized_arl0(const WeightedPair& pair, const ObservationModel& model, int horizon,
                              const SimOptions& sim);

// E_0 v_1, exact: v_1 reads only Y_0 = 0 and x_0.
double first_weight_mean(const WeightedPair& pair, const ObservationModel& model, int horizon);

// c_gamma for T*_M(c, N): E_0 sum_{j <= T*} v_j = target. Throws
// InfeasibleTarget when target is outside (E_0 v_1, sum_j E_0 v_j).
CalibrationResult calibrate(const ObservationModel& model, const WeightedPair& pair, double target, int horizon,
                            const GridSpec& grid, const CalibrationOptions& options);

// Threshold of a baseline detector so the pair's generalized ARL_0 hits the target.
CalibrationResult calibrate_detector(const DetectorSpec& spec, const ObservationModel& model, const WeightedPair& measure,
                                     double target, int horizon, const CalibrationOptions& options);

struct ValueFormula {
    double j = 0.0;          // c (1 - E_0 v_1 / gamma) - E_0 (l_1 - Y_1)^+ / gamma
    double garl_min = 0.0;   // c (gamma - E_0 v_1) - E_0 (l_1 - Y_1)^+
    double excess = 0.0;     // E_0 (l_1 - Y_1)^+ by quadrature (exact for Bernoulli)
    Estimate excess_mc;      // the same expectation by Monte Carlo
    Estimate j_mc;           // formula with the Monte Carlo expectation
    Estimate garl_min_mc;
};

// Value of T*(c_gamma) from its limits, given gamma = E_0 sum_{j <= T*} v_j.
ValueFormula value_formula(double c_gamma, double gamma, const ObservationModel& model, const WeightedPair& pair,
                           const ValueGrid& grid, std::int64_t reps, std::uint64_t seed);

}  // namespace optcd
