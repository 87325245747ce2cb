#include "optcd/detectors.hpp"

#include "optcd/error.hpp"
#include "optcd/format.hpp"

#include <algorithm>
#include <cmath>

namespace optcd {

LimitSchedule LimitSchedule::constant(double c) {
    if (std::isnan(c)) throw InvalidInput("constant limit must be a number");
    LimitSchedule s;
    s.kind_ = Kind::Constant;
    s.c_ = c;
    return s;
}

LimitSchedule LimitSchedule::linear_ramp(double c, double slope) {
    if (!(c >= 0.0) || !std::isfinite(c) || !std::isfinite(slope))
        throw InvalidInput("ramp limit needs finite c >= 0 and a finite slope");
    LimitSchedule s;
    s.kind_ = Kind::LinearRamp;
    s.c_ = c;
    s.slope_ = slope;
    return s;
}

LimitSchedule LimitSchedule::piecewise(std::vector<Segment> segments) {
    if (segments.empty()) throw InvalidInput("piecewise limit needs at least one segment");
    std::sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) { return a.from < b.from; });
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& g = segments[i];
        if (g.from < 1 || g.to < g.from) throw InvalidInput("piecewise limit: segment range must satisfy 1 <= from <= to");
        if (i > 0 && g.from <= segments[i - 1].to) throw InvalidInput("piecewise limit: segments overlap");
        if (!std::isfinite(g.base) || !std::isfinite(g.slope) || !std::isfinite(g.anchor))
            throw InvalidInput("piecewise limit: segment coefficients must be finite");
    }
    LimitSchedule s;
    s.kind_ = Kind::Piecewise;
    s.segments_ = std::move(segments);
    return s;
}

LimitSchedule LimitSchedule::value_grid(std::shared_ptr<const ValueGrid> grid) {
    if (!grid) throw InvalidInput("value grid schedule needs a grid");
    LimitSchedule s;
    s.kind_ = Kind::ValueGrid;
    s.c_ = grid->c();
    s.grid_ = std::move(grid);
    return s;
}

LimitSchedule LimitSchedule::equivalent(std::shared_ptr<const EquivalentLimitTable> table) {
    if (!table) throw InvalidInput("equivalent schedule needs a table");
    LimitSchedule s;
    s.kind_ = Kind::Equivalent;
    s.c_ = table->c();
    s.table_ = std::move(table);
    return s;
}

int LimitSchedule::horizon() const noexcept {
    if (grid_) return grid_->horizon();
    if (table_) return table_->horizon();
    return 0;
}

double LimitSchedule::at(int n, double y, double x) const {
    switch (kind_) {
        case Kind::Constant:
            return c_;
        case Kind::LinearRamp:
            return std::max(0.0, c_ * (1.0 + slope_ * n));
        case Kind::Piecewise:
            for (const auto& g : segments_)
                if (n >= g.from && n <= g.to) return std::max(0.0, g.at(n));
            throw ConfigError("piecewise limit has no segment covering n = " + std::to_string(n));
        case Kind::ValueGrid:
            return (*grid_)(n, y, x);
        case Kind::Equivalent:
            return (*table_)(n, x);
    }
    return 0.0;
}

std::string LimitSchedule::describe() const {
    switch (kind_) {
        case Kind::Constant:
            return "constant(" + format_double(c_) + ")";
        case Kind::LinearRamp:
            return "ramp(" + format_double(c_) + "," + format_double(slope_) + ")";
        case Kind::Piecewise: {
            std::string s = "piecewise(";
            for (std::size_t i = 0; i < segments_.size(); ++i) {
                const auto& g = segments_[i];
                s += (i ? ";" : "") + std::to_string(g.from) + "-" + std::to_string(g.to) + ":" + format_double(g.base);
                if (g.slope != 0.0) s += "+" + format_double(g.slope) + "*(k-" + format_double(g.anchor) + ")";
            }
            return s + ")";
        }
        case Kind::ValueGrid:
            return "value_grid(c=" + format_double(c_) + ")";
        case Kind::Equivalent:
            return "equivalent(c=" + format_double(c_) + ")";
    }
    return "";
}

Detector::Detector(std::string label, StatisticKernel statistic, LimitSchedule schedule)
    : label_(std::move(label)), statistic_(std::move(statistic)), schedule_(std::move(schedule)) {}

StoppingTime Detector::run(const Trajectory& traj) const {
    const int N = traj.horizon();
    if (schedule_.horizon() != 0 && schedule_.horizon() != N)
        throw ConfigError("detector '" + label_ + "' limits were built for N = " + std::to_string(schedule_.horizon()) +
                          ", trajectory has N = " + std::to_string(N));
    auto s = statistic_.start();
    for (int n = 1; n <= N; ++n) {
        statistic_.step(s, traj.values);
        const double l = schedule_.at(n, s.y, traj.values[n]);
        if (s.y >= l) return {n, s.y, l};
    }
    return {N + 1, s.y, 0.0};
}

namespace {

void check_meta(const ObservationModel& model, const WeightedPair& pair, const ValueGrid::Meta& meta) {
    if (meta.model != model.spec() || meta.pair != pair.label() || meta.x0 != model.x0())
        throw ConfigError("limit table was computed for model " + meta.model + " / pair " + meta.pair +
                          ", detector uses " + model.spec() + " / " + pair.label());
}

}  // namespace

Detector make_optimal(const ObservationModel& model, const WeightedPair& pair, std::shared_ptr<const ValueGrid> grid,
                      std::string label) {
    if (!grid) throw InvalidInput("make_optimal: null grid");
    check_meta(model, pair, grid->meta());
    if (label.empty()) label = "optimal(" + pair.label() + ",c=" + format_double(grid->c()) + ")";
    auto stat = StatisticKernel::optimal_recursive(model, pair, grid->horizon());
    return Detector(std::move(label), std::move(stat), LimitSchedule::value_grid(std::move(grid)));
}

Detector make_optimal(const ObservationModel& model, const WeightedPair& pair,
                      std::shared_ptr<const EquivalentLimitTable> table, std::string label) {
    if (!table) throw InvalidInput("make_optimal: null table");
    check_meta(model, pair, table->meta());
    if (label.empty()) label = "optimal(" + pair.label() + ",c=" + format_double(table->c()) + ",equivalent)";
    auto stat = StatisticKernel::optimal_recursive(model, pair, table->horizon());
    return Detector(std::move(label), std::move(stat), LimitSchedule::equivalent(std::move(table)));
}

}  // namespace optcd
