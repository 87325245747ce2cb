#include "optcd/statistics.hpp"

#include "optcd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace optcd {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

const char* to_string(StatisticKind kind) {
    switch (kind) {
        case StatisticKind::OptimalGeneral:
            return "optimal-general";
        case StatisticKind::OptimalRecursive:
            return "optimal-recursive";
        case StatisticKind::Cusum:
            return "cusum";
        case StatisticKind::ShiryaevRoberts:
            return "shiryaev-roberts";
        case StatisticKind::Ewma:
            return "ewma";
    }
    return "?";
}

StatisticKernel StatisticKernel::optimal(const ObservationModel& model, const WeightedPair& pair, int horizon) {
    return model.k_dependent() ? optimal_general(model, pair, horizon) : optimal_recursive(model, pair, horizon);
}

StatisticKernel StatisticKernel::optimal_general(const ObservationModel& model, const WeightedPair& pair, int horizon) {
    if (horizon < 2) throw InvalidInput("statistic: horizon must be >= 2");
    StatisticKernel k(StatisticKind::OptimalGeneral, model);
    k.pair_ = pair;
    k.horizon_ = horizon;
    return k;
}

StatisticKernel StatisticKernel::optimal_recursive(const ObservationModel& model, const WeightedPair& pair, int horizon) {
    if (model.k_dependent())
        throw UnsupportedConfiguration("recursive statistic needs change-point independent likelihood ratios");
    if (horizon < 2) throw InvalidInput("statistic: horizon must be >= 2");
    StatisticKernel k(StatisticKind::OptimalRecursive, model);
    k.pair_ = pair;
    k.horizon_ = horizon;
    return k;
}

StatisticKernel StatisticKernel::cusum(const ObservationModel& model) {
    if (model.k_dependent()) throw UnsupportedConfiguration("cusum needs change-point independent likelihood ratios");
    return StatisticKernel(StatisticKind::Cusum, model);
}

StatisticKernel StatisticKernel::shiryaev_roberts(const ObservationModel& model, double r) {
    if (model.k_dependent())
        throw UnsupportedConfiguration("shiryaev-roberts needs change-point independent likelihood ratios");
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidInput("shiryaev-roberts: head start r must be >= 0");
    StatisticKernel k(StatisticKind::ShiryaevRoberts, model);
    k.param_ = r;
    return k;
}

StatisticKernel StatisticKernel::ewma(double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidInput("ewma: smoothing parameter must lie in (0, 1]");
    StatisticKernel k(StatisticKind::Ewma, ObservationModel(IIDNormalShift{}));
    k.param_ = lambda;
    return k;
}

bool StatisticKernel::cusum_like() const noexcept {
    if (kind_ == StatisticKind::Cusum) return true;
    return kind_ == StatisticKind::OptimalRecursive &&
           (pair_->id() == PairId::M4 || pair_->id() == PairId::M6);
}

StatisticKernel::State StatisticKernel::start() const {
    State s;
    if (kind_ == StatisticKind::ShiryaevRoberts) s.y = param_;
    return s;
}

void StatisticKernel::step(State& s, std::span<const double> window) const {
    const int n = s.n + 1;
    if (window.size() < static_cast<std::size_t>(n) + 1) throw InvalidInput("statistic: window shorter than x_0..x_n");
    const double x = window[n];
    const double prev = window[n - 1];
    switch (kind_) {
        case StatisticKind::Cusum:
            s.y = std::max(1.0, s.y) * std::exp(model_.log_lr_step(x, prev));
            break;
        case StatisticKind::ShiryaevRoberts:
            s.y = (1.0 + s.y) * std::exp(model_.log_lr_step(x, prev));
            break;
        case StatisticKind::Ewma:
            s.y = (1.0 - param_) * s.y + param_ * x;
            break;
        case StatisticKind::OptimalRecursive: {
            const WeightState ws{n, horizon_, s.y, window.first(n)};
            s.y = (s.y + pair_->w(ws)) * std::exp(model_.log_lr_step(x, prev));
            break;
        }
        case StatisticKind::OptimalGeneral: {
            const std::size_t m = model_.component_count();
            const std::size_t stride = m + 1;
            const WeightState ws{n, horizon_, s.y, window.first(n)};
            const double wk = pair_->w(ws);
            s.terms.push_back(wk > 0.0 ? std::log(wk) : kNegInf);
            for (std::size_t i = 0; i < m; ++i) s.terms.push_back(model_.component_log_prob(i));
            std::vector<double> step_llr(m);
            for (std::size_t i = 0; i < m; ++i) step_llr[i] = model_.component_log_lr(i, x, prev);
            double log_y = kNegInf;
            for (int k = 1; k <= n; ++k) {
                double* t = s.terms.data() + (k - 1) * stride;
                double log_prod = kNegInf;
                for (std::size_t i = 0; i < m; ++i) {
                    t[1 + i] += step_llr[i];
                    log_prod = log_add(log_prod, t[1 + i]);
                }
                if (t[0] != kNegInf) log_y = log_add(log_y, t[0] + log_prod);
            }
            s.y = std::exp(log_y);
            break;
        }
    }
    s.n = n;
}

StatisticPath run_kernel(const StatisticKernel& kernel, const Trajectory& traj) {
    const int N = traj.horizon();
    StatisticPath path;
    path.kind = kernel.kind();
    path.y.resize(static_cast<std::size_t>(N) + 2);
    auto s = kernel.start();
    path.y[0] = s.y;
    for (int n = 1; n <= N; ++n) {
        kernel.step(s, traj.values);
        path.y[n] = s.y;
    }
    path.y[N + 1] = path.y[N];
    return path;
}

StatisticPath statistic_path_general(const ObservationModel& model, const WeightedPair& pair, const Trajectory& traj) {
    return run_kernel(StatisticKernel::optimal_general(model, pair, traj.horizon()), traj);
}

StatisticPath statistic_path_recursive(const ObservationModel& model, const WeightedPair& pair, const Trajectory& traj) {
    return run_kernel(StatisticKernel::optimal_recursive(model, pair, traj.horizon()), traj);
}

StatisticPath baseline_path(const BaselineStatistic& which, const ObservationModel& model, const Trajectory& traj) {
    switch (which.kind) {
        case StatisticKind::Cusum:
            return run_kernel(StatisticKernel::cusum(model), traj);
        case StatisticKind::ShiryaevRoberts:
            return run_kernel(StatisticKernel::shiryaev_roberts(model, which.param), traj);
        case StatisticKind::Ewma:
            return run_kernel(StatisticKernel::ewma(which.param), traj);
        default:
            throw InvalidInput("baseline_path: kind must be cusum, shiryaev-roberts or ewma");
    }
}

}  // namespace optcd
