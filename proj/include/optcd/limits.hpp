#pragma once

#include "optcd/obs_models.hpp"
#include "optcd/weights.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace optcd {

struct GridSpec {
    int y_knots = 512;     // log-spaced knots on [y_min, y_max]; a knot at y = 0 is added
    double y_min = 1e-6;
    double y_max = 0.0;    // 0 selects the automatic bound
    int x_knots = 257;     // surfaces only
    double x_sds = 6.0;    // x range in marginal standard deviations
    int quad_nodes = 64;
    double fp_tol = 1e-10;
    int workers = 0;       // 0: hardware concurrency
};

// Knot layout shared by grids and their persisted form.
struct GridAxes {
    double y_min = 0.0;
    double y_max = 0.0;
    int y_count = 0;  // log-spaced knots, excluding y = 0
    double x_lo = 0.0;
    double x_hi = 0.0;
    int x_count = 0;  // 0 for curves
    std::vector<double> y;  // 0, y_min, ..., y_max
    std::vector<double> x;

    static GridAxes make(double y_min, double y_max, int y_count, double x_lo, double x_hi, int x_count);
    bool surface() const noexcept { return x_count > 0; }
};

// l_n(c, y[, x]) for n = 0 .. N+1 on the grid; linear in log y (linear in y
// between 0 and y_min), linear in x, clamped outside.
class ValueGrid {
public:
    struct Meta {
        double c = 0.0;
        int horizon = 0;
        std::string model;
        double x0 = 0.0;
        std::string pair;
        int quad_nodes = 0;
    };

    ValueGrid(Meta meta, GridAxes axes, std::vector<double> values);

    const Meta& meta() const noexcept { return meta_; }
    double c() const noexcept { return meta_.c; }
    int horizon() const noexcept { return meta_.horizon; }
    const GridAxes& axes() const noexcept { return axes_; }
    bool surface() const noexcept { return axes_.surface(); }

    double operator()(int n, double y, double x = 0.0) const;
    double node(int n, std::size_t ix, std::size_t iy) const { return values_[index(n, ix, iy)]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t index(int n, std::size_t ix, std::size_t iy) const {
        return (static_cast<std::size_t>(n) * nx_ + ix) * axes_.y.size() + iy;
    }

    Meta meta_;
    GridAxes axes_;
    std::size_t nx_;
    double log_y_min_;
    double inv_dlog_;
    double inv_dx_;
    std::vector<double> values_;
};

// Fixed points y_n(c[, x]) with y_n = l_n(c, y_n[, x]) for n = 1..N.
class EquivalentLimitTable {
public:
    EquivalentLimitTable(ValueGrid::Meta meta, std::vector<double> x_knots, std::vector<double> values,
                         double max_residual);

    const ValueGrid::Meta& meta() const noexcept { return meta_; }
    double c() const noexcept { return meta_.c; }
    int horizon() const noexcept { return meta_.horizon; }
    const std::vector<double>& x_knots() const noexcept { return x_; }
    bool scalar() const noexcept { return x_.empty(); }
    double max_residual() const noexcept { return max_residual_; }

    // n in 1..N; x ignored for scalar tables.
    double operator()(int n, double x = 0.0) const;
    double node(int n, std::size_t ix) const { return values_[(n - 1) * std::max<std::size_t>(x_.size(), 1) + ix]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    ValueGrid::Meta meta_;
    std::vector<double> x_;
    std::vector<double> values_;
    double max_residual_;
};

// Markov order the limit recursion must carry: max of the model's and the pair's.
int limit_state_order(const ObservationModel& model, const WeightedPair& pair);

// Upper bound on every l_n(c): c * sum_j sup v_j.
double limit_bound(const WeightedPair& pair, double c, int horizon);

ValueGrid backward_limits(const ObservationModel& model, const WeightedPair& pair, double c, int horizon,
                          const GridSpec& spec = {});

// Right-hand side of the limit recursion at an arbitrary state, using the
// grid's l_{n+1}: c v_{n+1}(y, x) + E_0[(l_{n+1} - (y + w_{n+1}) Lambda_{n+1})^+].
double limit_rhs(const ObservationModel& model, const WeightedPair& pair, const ValueGrid& grid, int n, double y,
                 double x);

EquivalentLimitTable equivalent_limits(const ObservationModel& model, const WeightedPair& pair, const ValueGrid& grid,
                                       double fp_tol = 1e-10);

}  // namespace optcd
