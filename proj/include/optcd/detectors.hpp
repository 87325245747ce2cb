#pragma once

#include "optcd/limits.hpp"
#include "optcd/statistics.hpp"

#include <memory>
#include <string>
#include <vector>

namespace optcd {

// l_k = base + slope (k - anchor) for from <= k <= to.
struct Segment {
    int from = 1;
    int to = 1;
    double base = 0.0;
    double slope = 0.0;
    double anchor = 0.0;

    double at(int k) const noexcept { return base + slope * (k - anchor); }
};

class LimitSchedule {
public:
    enum class Kind { Constant, LinearRamp, Piecewise, ValueGrid, Equivalent };

    static LimitSchedule constant(double c);
    // l_k = c (1 + slope k), floored at 0.
    static LimitSchedule linear_ramp(double c, double slope);
    static LimitSchedule piecewise(std::vector<Segment> segments);
    static LimitSchedule value_grid(std::shared_ptr<const ValueGrid> grid);
    static LimitSchedule equivalent(std::shared_ptr<const EquivalentLimitTable> table);

    Kind kind() const noexcept { return kind_; }
    double c() const noexcept { return c_; }
    double slope() const noexcept { return slope_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }
    const std::shared_ptr<const ValueGrid>& grid() const noexcept { return grid_; }
    const std::shared_ptr<const EquivalentLimitTable>& table() const noexcept { return table_; }

    // Horizon the schedule was built for, or 0 when it is horizon-free.
    int horizon() const noexcept;

    // l_n at statistic value y and current observation x, for 1 <= n <= N.
    double at(int n, double y, double x) const;

    std::string describe() const;

private:
    Kind kind_ = Kind::Constant;
    double c_ = 0.0;
    double slope_ = 0.0;
    std::vector<Segment> segments_;
    std::shared_ptr<const ValueGrid> grid_;
    std::shared_ptr<const EquivalentLimitTable> table_;
};

struct StoppingTime {
    int T = 0;
    double alarm_value = 0.0;
    double alarm_limit = 0.0;
};

class Detector {
public:
    Detector(std::string label, StatisticKernel statistic, LimitSchedule schedule);

    const std::string& label() const noexcept { return label_; }
    const StatisticKernel& statistic() const noexcept { return statistic_; }
    const LimitSchedule& schedule() const noexcept { return schedule_; }

    // Y_n >= l_n; n = N+1 always alarms.
    bool alarm(int n, int horizon, double y, double x) const {
        return n > horizon || y >= schedule_.at(n, y, x);
    }

    StoppingTime run(const Trajectory& traj) const;

private:
    std::string label_;
    StatisticKernel statistic_;
    LimitSchedule schedule_;
};

// Optimal test T*_M(c, N) from a value grid (rule Y_n >= l_n(c, Y_n, X_n)) or
// from its equivalent fixed-point limits.
Detector make_optimal(const ObservationModel& model, const WeightedPair& pair, std::shared_ptr<const ValueGrid> grid,
                      std::string label = {});
Detector make_optimal(const ObservationModel& model, const WeightedPair& pair,
                      std::shared_ptr<const EquivalentLimitTable> table, std::string label = {});

}  // namespace optcd
