#pragma once

#include "optcd/detectors.hpp"
#include "optcd/obs_models.hpp"
#include "optcd/weights.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace optcd {

struct Estimate {
    double value = 0.0;
    double se = 0.0;  // standard error
    std::int64_t n = 0;  // samples behind the estimate; 0 means undefined
};

// Per-measure results for one detector.
struct MeasureReport {
    std::string pair;
    Estimate gen_arl0;       // E_0 sum_{j <= T} v_j
    Estimate garl_direct;    // sum_k E_k w_k (T - k)^+
    Estimate garl_identity;  // E_0 sum_{m <= T} Y_{m-1}, Y the pair's statistic
    Estimate j_ratio;        // garl_direct / gen_arl0
};

struct DelayProfile {
    bool conditioned = false;     // Lorden profile conditioned on Y_{k-1} <= 1
    std::vector<Estimate> lorden;  // index k - 1
    std::vector<Estimate> pollak;
    Estimate lorden_max;
    int lorden_argmax = 0;
    Estimate pollak_max;
    int pollak_argmax = 0;
    std::vector<int> undefined;         // k left out of the Lorden maximum
    std::vector<int> pollak_undefined;  // k left out of the Pollak maximum
};

struct RunReport {
    std::string detector;
    std::string model;
    int horizon = 0;
    std::int64_t reps = 0;
    std::uint64_t seed = 0;
    Estimate arl0;            // E_0 T
    Estimate p_no_alarm;      // P_0(T = N + 1)
    std::vector<MeasureReport> measures;
    std::optional<DelayProfile> delays;
    double wall_seconds = 0.0;
};

struct SimOptions {
    std::int64_t reps = 100000;
    std::uint64_t seed = 1;
    int workers = 0;
    bool direct = true;   // simulate the post-change branches
    bool delays = false;  // per-k delay profiles (requires direct)
    int block = 1024;     // reps per deterministic merge block
    std::int64_t min_conditioned = 1000;  // paths a delay-profile entry needs to enter the maxima
};

// One pass over `reps` replications. Each replication draws pre-change
// innovations for the P_0 path and post-change innovations reused by every
// P_k branch, which restarts from the P_0 state at k - 1.
RunReport simulate(const Detector& detector, const ObservationModel& model, std::span<const WeightedPair> measures,
                   int horizon, const SimOptions& options);

Estimate estimate_arl0(const Detector& detector, const WeightedPair& pair, const ObservationModel& model, int horizon,
                       std::int64_t reps, std::uint64_t seed, int workers = 0);
Estimate estimate_garl_direct(const Detector& detector, const WeightedPair& pair, const ObservationModel& model,
                              int horizon, std::int64_t reps_per_k, std::uint64_t seed, int workers = 0);
Estimate estimate_garl_identity(const Detector& detector, const WeightedPair& pair, const ObservationModel& model,
                                int horizon, std::int64_t reps, std::uint64_t seed, int workers = 0);
DelayProfile delay_profiles(const Detector& detector, const ObservationModel& model, int horizon,
                            std::int64_t reps_per_k, std::uint64_t seed, int workers = 0);

// CSV with columns detector,metric,estimate,stderr,reps,seed.
void write_report_header(std::ostream& out);
void write_report_rows(std::ostream& out, const RunReport& report, bool profiles = false);
std::string csv_field(const std::string& text);

}  // namespace optcd
