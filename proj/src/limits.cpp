#include "optcd/limits.hpp"

#include "optcd/error.hpp"
#include "optcd/format.hpp"
#include "optcd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace optcd {
namespace {

struct Loc {
    std::size_t i;  // lower knot; the upper one is i + 1
    double f;       // weight of the upper knot
};

struct YLocator {
    double y_min;
    double log_y_min;
    double inv_dlog;
    std::size_t count;  // log-spaced knots

    Loc operator()(double y, double log_y) const {
        if (!(y > 0.0)) return {0, 0.0};
        if (y < y_min) return {0, y / y_min};
        const double t = (log_y - log_y_min) * inv_dlog;
        if (t >= static_cast<double>(count - 1)) return {count - 1, 1.0};
        const auto i = static_cast<std::size_t>(t);
        return {1 + i, t - static_cast<double>(i)};
    }
};

Loc locate_x(double x, double lo, double inv_dx, std::size_t count) {
    if (count < 2) return {0, 0.0};
    const double t = (x - lo) * inv_dx;
    if (!(t > 0.0)) return {0, 0.0};
    if (t >= static_cast<double>(count - 1)) return {count - 2, 1.0};
    const auto i = static_cast<std::size_t>(t);
    return {i, t - static_cast<double>(i)};
}

double blend(const double* layer, std::size_t ny, Loc ly, Loc lx, bool surface) {
    const double* row = layer + lx.i * ny;
    const double lo = row[ly.i] + ly.f * (row[ly.i + 1] - row[ly.i]);
    if (!surface || lx.f == 0.0) return lo;
    const double* up = row + ny;
    const double hi = up[ly.i] + ly.f * (up[ly.i + 1] - up[ly.i]);
    return lo + lx.f * (hi - lo);
}

void check_model_and_pair(const ObservationModel& model, const WeightedPair& pair) {
    if (pair.order() == kNonMarkov)
        throw UnsupportedConfiguration("pair " + pair.label() +
                                       " reads the whole observation prefix; its statistic is not Markov");
    if (model.k_dependent())
        throw UnsupportedConfiguration("limit recursion needs change-point independent likelihood ratios; model " +
                                       model.spec() + " is a mixture");
    if (limit_state_order(model, pair) > 1)
        throw UnsupportedConfiguration("limit recursion supports Markov order 0 or 1 only");
}

}  // namespace

GridAxes GridAxes::make(double y_min, double y_max, int y_count, double x_lo, double x_hi, int x_count) {
    if (!(y_min > 0.0) || !(y_max > y_min) || y_count < 2)
        throw InvalidInput("grid: need 0 < y_min < y_max and at least 2 y knots");
    if (x_count == 1 || (x_count >= 2 && !(x_hi > x_lo)))
        throw InvalidInput("grid: need x_lo < x_hi and at least 2 x knots");
    GridAxes a;
    a.y_min = y_min;
    a.y_max = y_max;
    a.y_count = y_count;
    a.x_lo = x_lo;
    a.x_hi = x_hi;
    a.x_count = x_count;
    a.y.resize(static_cast<std::size_t>(y_count) + 1);
    a.y[0] = 0.0;
    const double dlog = std::log(y_max / y_min) / (y_count - 1);
    for (int i = 0; i < y_count - 1; ++i) a.y[1 + i] = y_min * std::exp(i * dlog);
    a.y[y_count] = y_max;
    if (x_count >= 2) {
        a.x.resize(x_count);
        const double dx = (x_hi - x_lo) / (x_count - 1);
        for (int i = 0; i < x_count - 1; ++i) a.x[i] = x_lo + i * dx;
        a.x[x_count - 1] = x_hi;
    }
    return a;
}

ValueGrid::ValueGrid(Meta meta, GridAxes axes, std::vector<double> values)
    : meta_(std::move(meta)), axes_(std::move(axes)), values_(std::move(values)) {
    nx_ = std::max<std::size_t>(axes_.x.size(), 1);
    if (values_.size() != static_cast<std::size_t>(meta_.horizon + 2) * nx_ * axes_.y.size())
        throw InvalidInput("value grid: value count does not match axes and horizon");
    log_y_min_ = std::log(axes_.y_min);
    inv_dlog_ = (axes_.y_count - 1) / std::log(axes_.y_max / axes_.y_min);
    inv_dx_ = axes_.x_count >= 2 ? (axes_.x_count - 1) / (axes_.x_hi - axes_.x_lo) : 0.0;
}

double ValueGrid::operator()(int n, double y, double x) const {
    if (n < 0 || n > meta_.horizon + 1) throw InvalidInput("value grid: time index outside 0..N+1");
    const YLocator yl{axes_.y_min, log_y_min_, inv_dlog_, static_cast<std::size_t>(axes_.y_count)};
    const Loc ly = yl(y, y > 0.0 ? std::log(y) : 0.0);
    const Loc lx = locate_x(x, axes_.x_lo, inv_dx_, axes_.x.size());
    return blend(values_.data() + index(n, 0, 0), axes_.y.size(), ly, lx, surface());
}

EquivalentLimitTable::EquivalentLimitTable(ValueGrid::Meta meta, std::vector<double> x_knots,
                                           std::vector<double> values, double max_residual)
    : meta_(std::move(meta)), x_(std::move(x_knots)), values_(std::move(values)), max_residual_(max_residual) {
    if (x_.size() == 1) throw InvalidInput("equivalent limits: need 0 or at least 2 x knots");
    if (values_.size() != static_cast<std::size_t>(meta_.horizon) * std::max<std::size_t>(x_.size(), 1))
        throw InvalidInput("equivalent limits: value count does not match horizon and knots");
}

double EquivalentLimitTable::operator()(int n, double x) const {
    if (n < 1 || n > meta_.horizon) throw InvalidInput("equivalent limits: time index outside 1..N");
    if (x_.empty()) return values_[n - 1];
    const double inv_dx = (x_.size() - 1) / (x_.back() - x_.front());
    const Loc lx = locate_x(x, x_.front(), inv_dx, x_.size());
    const double* row = values_.data() + (n - 1) * x_.size();
    return row[lx.i] + lx.f * (row[lx.i + 1] - row[lx.i]);
}

int limit_state_order(const ObservationModel& model, const WeightedPair& pair) {
    return std::max(model.markov_order(), pair.order());
}

double limit_bound(const WeightedPair& pair, double c, int horizon) {
    double total = 0.0;
    for (int j = 1; j <= horizon + 1; ++j) total += pair.v_sup(j, horizon);
    return c * total;
}

ValueGrid backward_limits(const ObservationModel& model, const WeightedPair& pair, double c, int horizon,
                          const GridSpec& spec) {
    if (horizon < 2) throw InvalidInput("backward_limits: horizon must be >= 2");
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidInput("backward_limits: c must be finite and >= 0");
    check_model_and_pair(model, pair);
    if (spec.quad_nodes < 1) throw InvalidInput("grid: quad_nodes must be positive");

    const bool surface = limit_state_order(model, pair) == 1;
    const double y_max = spec.y_max > 0.0 ? spec.y_max : std::max(1.0, 1.05 * limit_bound(pair, c, horizon));
    double x_lo = 0.0, x_hi = 0.0;
    int x_count = 0;
    if (surface) {
        if (model.discrete()) {
            x_lo = 0.0;
            x_hi = 1.0;
            x_count = 2;
        } else {
            std::tie(x_lo, x_hi) = model.observation_range(spec.x_sds);
            x_count = spec.x_knots;
        }
    }
    GridAxes axes = GridAxes::make(spec.y_min, y_max, spec.y_knots, x_lo, x_hi, x_count);

    const std::size_t ny = axes.y.size();
    const std::size_t nx = std::max<std::size_t>(axes.x.size(), 1);
    const std::size_t layer = nx * ny;
    std::vector<double> values(static_cast<std::size_t>(horizon + 2) * layer, 0.0);
    auto x_at = [&](std::size_t ix) { return surface ? axes.x[ix] : model.x0(); };

    // l_N = c v_{N+1}; l_{N+1} = 0 is already in place.
    {
        std::vector<double> hist(static_cast<std::size_t>(horizon) + 1, 0.0);
        double* out = values.data() + static_cast<std::size_t>(horizon) * layer;
        for (std::size_t ix = 0; ix < nx; ++ix) {
            hist[horizon] = x_at(ix);
            for (std::size_t iy = 0; iy < ny; ++iy)
                out[ix * ny + iy] = c * pair.v({horizon + 1, horizon, axes.y[iy], hist});
        }
    }

    const YLocator yl{axes.y_min, std::log(axes.y_min), (axes.y_count - 1) / std::log(axes.y_max / axes.y_min),
                      static_cast<std::size_t>(axes.y_count)};
    const double inv_dx = surface ? (axes.x_count - 1) / (axes.x_hi - axes.x_lo) : 0.0;
    constexpr std::size_t kBlock = 64;
    const std::size_t y_blocks = (ny + kBlock - 1) / kBlock;

    for (int n = horizon - 1; n >= 0; --n) {
        const double* next = values.data() + static_cast<std::size_t>(n + 1) * layer;
        double* out = values.data() + static_cast<std::size_t>(n) * layer;
        parallel_for(nx * y_blocks, spec.workers, [&](std::size_t task) {
            const std::size_t ix = task / y_blocks;
            const std::size_t iy0 = (task % y_blocks) * kBlock;
            const std::size_t iy1 = std::min(ny, iy0 + kBlock);
            const double a = x_at(ix);
            const auto nodes = model.pre_change_nodes(a, spec.quad_nodes);
            const std::size_t q = nodes.size();
            std::vector<double> llr(q), lam(q);
            std::vector<Loc> lx(q);
            for (std::size_t i = 0; i < q; ++i) {
                llr[i] = model.log_lr_step(nodes[i].x, a);
                lam[i] = std::exp(llr[i]);
                lx[i] = surface ? locate_x(nodes[i].x, axes.x_lo, inv_dx, axes.x.size()) : Loc{0, 0.0};
            }
            std::vector<double> hist(static_cast<std::size_t>(n) + 1, 0.0);
            hist[n] = a;
            for (std::size_t iy = iy0; iy < iy1; ++iy) {
                const double y = axes.y[iy];
                const WeightState ws{n + 1, horizon, y, hist};
                const double s = y + pair.w(ws);
                double e = 0.0;
                if (s > 0.0) {
                    const double ls = std::log(s);
                    for (std::size_t i = 0; i < q; ++i) {
                        const double yn = s * lam[i];
                        const double l = blend(next, ny, yl(yn, ls + llr[i]), lx[i], surface);
                        if (l > yn) e += nodes[i].weight * (l - yn);
                    }
                } else {
                    for (std::size_t i = 0; i < q; ++i) e += nodes[i].weight * blend(next, ny, Loc{0, 0.0}, lx[i], surface);
                }
                const double value = c * pair.v(ws) + e;
                if (!std::isfinite(value))
                    throw NumericalFailure("backward_limits: non-finite value at n=" + std::to_string(n) +
                                           " y=" + format_double(y) + " x=" + format_double(a) + " with " +
                                           std::to_string(q) + " quadrature nodes");
                out[ix * ny + iy] = value;
            }
        });
    }

    ValueGrid::Meta meta{c, horizon, model.spec(), model.x0(), pair.label(), spec.quad_nodes};
    return ValueGrid(std::move(meta), std::move(axes), std::move(values));
}

double limit_rhs(const ObservationModel& model, const WeightedPair& pair, const ValueGrid& grid, int n, double y,
                 double x) {
    const int N = grid.horizon();
    if (n < 0 || n > N + 1) throw InvalidInput("limit_rhs: time index outside 0..N+1");
    if (n == N + 1) return 0.0;
    std::vector<double> hist(static_cast<std::size_t>(n) + 1, 0.0);
    hist[n] = x;
    const WeightState ws{n + 1, N, y, hist};
    const double cv = grid.c() * pair.v(ws);
    if (n == N) return cv;
    const double s = y + pair.w(ws);
    double e = 0.0;
    for (const auto& node : model.pre_change_nodes(x, grid.meta().quad_nodes)) {
        const double yn = s * std::exp(model.log_lr_step(node.x, x));
        const double l = grid(n + 1, yn, node.x);
        if (l > yn) e += node.weight * (l - yn);
    }
    return cv + e;
}

EquivalentLimitTable equivalent_limits(const ObservationModel& model, const WeightedPair& pair, const ValueGrid& grid,
                                       double fp_tol) {
    if (!pair.equivalent_limit_hypotheses())
        throw UnsupportedConfiguration("pair " + pair.label() + " does not satisfy the equivalent-limit hypotheses");
    check_model_and_pair(model, pair);
    if (!(fp_tol > 0.0)) throw InvalidInput("equivalent limits: tolerance must be positive");
    const int N = grid.horizon();
    const auto& xk = grid.axes().x;
    const std::size_t nx = std::max<std::size_t>(xk.size(), 1);
    std::vector<double> values(static_cast<std::size_t>(N) * nx);
    std::vector<double> residual(values.size(), 0.0);
    const double y_hi = grid.axes().y_max;

    parallel_for(values.size(), 0, [&](std::size_t task) {
        const int n = static_cast<int>(task / nx) + 1;
        const double x = xk.empty() ? model.x0() : xk[task % nx];
        auto f = [&](double y) { return limit_rhs(model, pair, grid, n, y, x) - y; };
        const double f0 = f(0.0);
        if (f0 <= 0.0) {
            values[task] = 0.0;
            residual[task] = std::abs(f0);
            return;
        }
        const double fhi = f(y_hi);
        if (fhi >= 0.0)
            throw NumericalFailure("equivalent limits: no sign change on [0, " + format_double(y_hi) + "] at n=" +
                                   std::to_string(n) + " (f(0)=" + format_double(f0) + ", f(y_max)=" +
                                   format_double(fhi) + "); y_max too small");
        double lo = 0.0, hi = y_hi, mid = 0.5 * (lo + hi), fm = f(mid);
        for (int it = 0; it < 200 && std::abs(fm) > fp_tol; ++it) {
            if (fm > 0.0)
                lo = mid;
            else
                hi = mid;
            const double m2 = 0.5 * (lo + hi);
            if (m2 == lo || m2 == hi) break;
            mid = m2;
            fm = f(mid);
        }
        values[task] = mid;
        residual[task] = std::abs(fm);
    });

    const double max_res = *std::max_element(residual.begin(), residual.end());
    return EquivalentLimitTable(grid.meta(), xk, std::move(values), max_res);
}

}  // namespace optcd
