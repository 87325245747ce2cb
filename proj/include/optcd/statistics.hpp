#pragma once

#include "optcd/obs_models.hpp"
#include "optcd/weights.hpp"

#include <optional>
#include <span>
#include <vector>

namespace optcd {

enum class StatisticKind { OptimalGeneral, OptimalRecursive, Cusum, ShiryaevRoberts, Ewma };

const char* to_string(StatisticKind kind);

struct StatisticPath {
    std::vector<double> y;  // Y_0 .. Y_{N+1}
    StatisticKind kind = StatisticKind::OptimalRecursive;
};

// Incremental form of every statistic. State is a plain value so simulations
// can snapshot it before a change point and branch.
class StatisticKernel {
public:
    struct State {
        int n = 0;
        double y = 0.0;
        // General kernel only: per k, log w_k followed by the per-component
        // log pi_i + sum_{j=k}^n log Lambda_{i,j}.
        std::vector<double> terms;
    };

    // Eq. (4) for k-dependent models, the recursion otherwise.
    static StatisticKernel optimal(const ObservationModel& model, const WeightedPair& pair, int horizon);
    static StatisticKernel optimal_general(const ObservationModel& model, const WeightedPair& pair, int horizon);
    static StatisticKernel optimal_recursive(const ObservationModel& model, const WeightedPair& pair, int horizon);
    static StatisticKernel cusum(const ObservationModel& model);
    static StatisticKernel shiryaev_roberts(const ObservationModel& model, double r);
    static StatisticKernel ewma(double lambda);

    StatisticKind kind() const noexcept { return kind_; }
    const std::optional<WeightedPair>& pair() const noexcept { return pair_; }
    // Statistic equal to the CUSUM recursion max{1, Y} Lambda.
    bool cusum_like() const noexcept;

    State start() const;
    // Consumes x_n; `window` holds x_0 .. x_n with n = s.n + 1.
    void step(State& s, std::span<const double> window) const;

private:
    StatisticKernel(StatisticKind kind, ObservationModel model) : kind_(kind), model_(std::move(model)) {}

    StatisticKind kind_;
    ObservationModel model_;
    std::optional<WeightedPair> pair_;
    int horizon_ = 0;
    double param_ = 0.0;  // r for SR, lambda for EWMA
};

StatisticPath statistic_path_general(const ObservationModel& model, const WeightedPair& pair, const Trajectory& traj);
StatisticPath statistic_path_recursive(const ObservationModel& model, const WeightedPair& pair, const Trajectory& traj);

struct BaselineStatistic {
    StatisticKind kind = StatisticKind::Cusum;  // Cusum, ShiryaevRoberts or Ewma
    double param = 0.0;                         // r or lambda
};

StatisticPath baseline_path(const BaselineStatistic& which, const ObservationModel& model, const Trajectory& traj);

// Runs a kernel over a full trajectory, appending Y_{N+1} = Y_N.
StatisticPath run_kernel(const StatisticKernel& kernel, const Trajectory& traj);

}  // namespace optcd
