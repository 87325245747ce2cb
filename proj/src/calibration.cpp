#include "optcd/calibration.hpp"

#include "optcd/error.hpp"
#include "optcd/format.hpp"
#include "optcd/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace optcd {

CalibrationResult calibrate_threshold(const std::function<Estimate(double)>& g, double target,
                                      const CalibrationOptions& o) {
    if (!(target > 0.0) || !std::isfinite(target)) throw InvalidInput("calibration target must be positive");
    if (!(o.tolerance > 0.0)) throw InvalidInput("calibration tolerance must be positive");
    if (!(o.c_hi > o.c_lo)) throw InvalidInput("calibration bracket needs c_lo < c_hi");

    CalibrationResult r;
    r.target_gamma = target;
    const double tol = o.tolerance * target;
    auto record = [&](double c, const Estimate& e) {
        ++r.iterations;
        if (r.iterations == 1 || std::abs(e.value - target) < std::abs(r.achieved_gamma - target)) {
            r.c_gamma = c;
            r.achieved_gamma = e.value;
            r.mc_stderr = e.se;
        }
        if (std::abs(e.value - target) <= tol) {
            r.c_gamma = c;
            r.achieved_gamma = e.value;
            r.mc_stderr = e.se;
            r.converged = true;
        }
        return e.value - target;
    };

    double c_lo = o.c_lo;
    double c_hi = o.c_hi;
    double f_lo = 0.0;
    double f_hi = 0.0;
    auto below_floor = [&](double f) {
        if (f > 0.0)
            throw InvalidInput("calibration: g(" + format_double(o.c_lo) + ") = " + format_double(f + target) +
                               " already exceeds the target " + format_double(target));
    };
    if (o.guess && *o.guess > o.c_lo) {
        const double c = *o.guess;
        const double f = record(c, g(c));
        if (r.converged) return r;
        if (f < 0.0) {
            c_lo = c;
            f_lo = f;
            c_hi = 2.0 * c;
            f_hi = record(c_hi, g(c_hi));
        } else {
            c_hi = c;
            f_hi = f;
            for (;;) {
                c_lo = 0.5 * c_hi;
                if (c_lo - o.c_lo <= 1e-3 * (c - o.c_lo)) c_lo = o.c_lo;
                f_lo = record(c_lo, g(c_lo));
                if (r.converged) return r;
                if (f_lo < 0.0) break;
                if (c_lo == o.c_lo) below_floor(f_lo);
                c_hi = c_lo;
                f_hi = f_lo;
            }
        }
    } else {
        f_lo = record(c_lo, g(c_lo));
        if (r.converged) return r;
        below_floor(f_lo);
        f_hi = record(c_hi, g(c_hi));
    }
    while (f_hi < 0.0 && !r.converged) {
        c_lo = c_hi;
        f_lo = f_hi;
        c_hi *= 2.0;
        if (c_hi > o.c_cap)
            throw NumericalFailure("calibration: g(c) stays below " + format_double(target) + " up to c = " +
                                   format_double(o.c_cap));
        f_hi = record(c_hi, g(c_hi));
    }

    int side = 0;
    while (!r.converged && r.iterations < o.max_iter) {
        double c = (c_lo * f_hi - c_hi * f_lo) / (f_hi - f_lo);
        if (!(c > c_lo && c < c_hi)) c = 0.5 * (c_lo + c_hi);
        const double f = record(c, g(c));
        if (r.converged) break;
        if (f < 0.0) {
            c_lo = c;
            f_lo = f;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        } else {
            c_hi = c;
            f_hi = f;
            if (side == 1) f_lo *= 0.5;
            side = 1;
        }
        if (c_hi - c_lo <= 1e-12 * std::max(1.0, std::abs(c_hi))) break;
    }
    return r;
}

Estimate max_generalized_arl0(const WeightedPair& pair, const ObservationModel& model, int horizon,
                              const SimOptions& sim) {
    const Detector never("never", StatisticKernel::ewma(1.0),
                         LimitSchedule::constant(std::numeric_limits<double>::infinity()));
    SimOptions o = sim;
    o.direct = false;
    o.delays = false;
    return simulate(never, model, std::span(&pair, 1), horizon, o).measures[0].gen_arl0;
}

double first_weight_mean(const WeightedPair& pair, const ObservationModel& model, int horizon) {
    const double x0 = model.x0();
    return pair.v({1, horizon, 0.0, std::span(&x0, 1)});
}

namespace {

void check_feasible(double target, double lo, double hi) {
    if (!(target > lo && target < hi))
        throw InfeasibleTarget("target " + format_double(target) + " outside the feasible interval (" +
                                   format_double(lo) + ", " + format_double(hi) + ")",
                               lo, hi);
}

}  // namespace

CalibrationResult calibrate(const ObservationModel& model, const WeightedPair& pair, double target, int horizon,
                            const GridSpec& grid, const CalibrationOptions& options) {
    const double lo = first_weight_mean(pair, model, horizon);
    const double hi = max_generalized_arl0(pair, model, horizon, options.sim).value;
    check_feasible(target, lo, hi);
    SimOptions sim = options.sim;
    sim.direct = false;
    sim.delays = false;
    auto g = [&](double c) {
        auto vg = std::make_shared<const ValueGrid>(backward_limits(model, pair, c, horizon, grid));
        const Detector det = make_optimal(model, pair, vg);
        return simulate(det, model, std::span(&pair, 1), horizon, sim).measures[0].gen_arl0;
    };
    CalibrationOptions o = options;
    o.c_lo = std::max(0.0, o.c_lo);
    auto r = calibrate_threshold(g, target, o);
    r.feasible_lo = lo;
    r.feasible_hi = hi;
    return r;
}

CalibrationResult calibrate_detector(const DetectorSpec& spec, const ObservationModel& model, const WeightedPair& measure,
                                     double target, int horizon, const CalibrationOptions& options) {
    if (spec.name == "optimal") throw InvalidInput("calibrate_detector: use calibrate() for optimal detectors");
    if (spec.name == "cusum_dynamic" || spec.name == "sr_dynamic")
        throw InvalidInput("calibrate_detector: " + spec.name + " has no single threshold");
    const double hi = max_generalized_arl0(measure, model, horizon, options.sim).value;
    SimOptions sim = options.sim;
    sim.direct = false;
    sim.delays = false;
    auto g = [&](double t) {
        const Detector det = build_detector(spec, model, horizon, {}, t);
        return simulate(det, model, std::span(&measure, 1), horizon, sim).measures[0].gen_arl0;
    };
    const double lo = g(options.c_lo).value;
    check_feasible(target, lo, hi);
    auto r = calibrate_threshold(g, target, options);
    r.feasible_lo = lo;
    r.feasible_hi = hi;
    return r;
}

ValueFormula value_formula(double c_gamma, double gamma, const ObservationModel& model, const WeightedPair& pair,
                           const ValueGrid& grid, std::int64_t reps, std::uint64_t seed) {
    if (!(gamma > 0.0)) throw InvalidInput("value_formula: gamma must be positive");
    if (reps < 1) throw InvalidInput("value_formula: reps must be >= 1");
    const int N = grid.horizon();
    const double x0 = model.x0();
    const double ev1 = first_weight_mean(pair, model, N);
    const double w1 = pair.w({1, N, 0.0, std::span(&x0, 1)});
    auto shortfall = [&](double x) {
        const double win[2] = {x0, x};
        const double y1 = w1 * model.likelihood_ratio(1, 1, win);
        return std::max(0.0, grid(1, y1, x) - y1);
    };

    ValueFormula f;
    for (const auto& node : model.pre_change_nodes(x0, grid.meta().quad_nodes)) f.excess += node.weight * shortfall(node.x);
    f.j = c_gamma * (1.0 - ev1 / gamma) - f.excess / gamma;
    f.garl_min = c_gamma * (gamma - ev1) - f.excess;

    double s = 0.0, ss = 0.0;
    for (std::int64_t i = 0; i < reps; ++i) {
        Engine rng = substream(seed, static_cast<std::uint64_t>(i));
        const double d = shortfall(model.next_pre(model.draw_innovation(rng), x0));
        s += d;
        ss += d * d;
    }
    const double mean = s / reps;
    const double se = reps > 1 ? std::sqrt(std::max(0.0, (ss - s * mean) / (reps - 1)) / reps) : 0.0;
    f.excess_mc = {mean, se, reps};
    f.j_mc = {c_gamma * (1.0 - ev1 / gamma) - mean / gamma, se / gamma, reps};
    f.garl_min_mc = {c_gamma * (gamma - ev1) - mean, se, reps};
    return f;
}

}  // namespace optcd
