#include "optcd/obs_models.hpp"

#include "optcd/error.hpp"
#include "optcd/format.hpp"
#include "optcd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace optcd {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double normal_logpdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

double exp_logpdf(double x, double rate) { return x < 0.0 ? kNegInf : std::log(rate) - rate * x; }

double bernoulli_logpmf(double x, double p) {
    if (x == 1.0) return std::log(p);
    if (x == 0.0) return std::log1p(-p);
    return kNegInf;
}

void validate(const BaseFamily& f) {
    std::visit(overloaded{
                   [](const IIDNormalShift& m) {
                       if (!(m.sigma > 0.0) || !std::isfinite(m.mu0) || !std::isfinite(m.mu1) ||
                           !std::isfinite(m.sigma))
                           throw InvalidInput("normal: need finite means and sigma > 0");
                   },
                   [](const IIDExponentialRate& m) {
                       if (!(m.lambda0 > 0.0) || !(m.lambda1 > 0.0) || !std::isfinite(m.lambda0) ||
                           !std::isfinite(m.lambda1))
                           throw InvalidInput("exponential: rates must be positive and finite");
                   },
                   [](const AR1CorrShift& m) {
                       if (!(m.noise_sd > 0.0) || !std::isfinite(m.rho0) || !std::isfinite(m.rho1) ||
                           !std::isfinite(m.noise_sd))
                           throw InvalidInput("ar1: need finite coefficients and noise_sd > 0");
                   },
                   [](const IIDBernoulli& m) {
                       if (!(m.p0 >= 0.0 && m.p0 <= 1.0 && m.p1 >= 0.0 && m.p1 <= 1.0))
                           throw InvalidInput("bernoulli: probabilities must lie in [0, 1]");
                   },
               },
               f);
}

bool same_pre_law(const BaseFamily& a, const BaseFamily& b) {
    if (a.index() != b.index()) return false;
    return std::visit(overloaded{
                          [&](const IIDNormalShift& m) {
                              const auto& o = std::get<IIDNormalShift>(b);
                              return m.mu0 == o.mu0 && m.sigma == o.sigma;
                          },
                          [&](const IIDExponentialRate& m) { return m.lambda0 == std::get<IIDExponentialRate>(b).lambda0; },
                          [&](const AR1CorrShift& m) {
                              const auto& o = std::get<AR1CorrShift>(b);
                              return m.rho0 == o.rho0 && m.noise_sd == o.noise_sd;
                          },
                          [&](const IIDBernoulli& m) { return m.p0 == std::get<IIDBernoulli>(b).p0; },
                      },
                      a);
}

double log_pre(const BaseFamily& f, double x, double prev) {
    return std::visit(overloaded{
                          [&](const IIDNormalShift& m) { return normal_logpdf(x, m.mu0, m.sigma); },
                          [&](const IIDExponentialRate& m) { return exp_logpdf(x, m.lambda0); },
                          [&](const AR1CorrShift& m) { return normal_logpdf(x, m.rho0 * prev, m.noise_sd); },
                          [&](const IIDBernoulli& m) { return bernoulli_logpmf(x, m.p0); },
                      },
                      f);
}

double log_post(const BaseFamily& f, double x, double prev) {
    return std::visit(overloaded{
                          [&](const IIDNormalShift& m) { return normal_logpdf(x, m.mu1, m.sigma); },
                          [&](const IIDExponentialRate& m) { return exp_logpdf(x, m.lambda1); },
                          [&](const AR1CorrShift& m) { return normal_logpdf(x, m.rho1 * prev, m.noise_sd); },
                          [&](const IIDBernoulli& m) { return bernoulli_logpmf(x, m.p1); },
                      },
                      f);
}

// Closed forms; these agree with log_post - log_pre on the support but avoid
// the cancellation of two large log densities.
double log_lr(const BaseFamily& f, double x, double prev) {
    return std::visit(
        overloaded{
            [&](const IIDNormalShift& m) {
                return (m.mu1 - m.mu0) * (x - 0.5 * (m.mu0 + m.mu1)) / (m.sigma * m.sigma);
            },
            [&](const IIDExponentialRate& m) {
                if (x < 0.0) throw DomainError("exponential: observation " + format_double(x) + " outside support");
                return std::log(m.lambda1 / m.lambda0) - (m.lambda1 - m.lambda0) * x;
            },
            [&](const AR1CorrShift& m) {
                return (m.rho1 - m.rho0) * prev * (x - 0.5 * (m.rho0 + m.rho1) * prev) / (m.noise_sd * m.noise_sd);
            },
            [&](const IIDBernoulli& m) {
                const double lp = bernoulli_logpmf(x, m.p0);
                if (lp == kNegInf)
                    throw DomainError("bernoulli: pre-change probability of " + format_double(x) + " is zero");
                return bernoulli_logpmf(x, m.p1) - lp;
            },
        },
        f);
}

double apply_pre(const BaseFamily& f, double u, double prev) {
    return std::visit(overloaded{
                          [&](const IIDNormalShift& m) { return m.mu0 + m.sigma * u; },
                          [&](const IIDExponentialRate& m) { return u / m.lambda0; },
                          [&](const AR1CorrShift& m) { return m.rho0 * prev + m.noise_sd * u; },
                          [&](const IIDBernoulli& m) { return u < m.p0 ? 1.0 : 0.0; },
                      },
                      f);
}

double apply_post(const BaseFamily& f, double u, double prev) {
    return std::visit(overloaded{
                          [&](const IIDNormalShift& m) { return m.mu1 + m.sigma * u; },
                          [&](const IIDExponentialRate& m) { return u / m.lambda1; },
                          [&](const AR1CorrShift& m) { return m.rho1 * prev + m.noise_sd * u; },
                          [&](const IIDBernoulli& m) { return u < m.p1 ? 1.0 : 0.0; },
                      },
                      f);
}

std::string base_spec(const BaseFamily& f) {
    auto d = [](double v) { return format_double(v); };
    return std::visit(overloaded{
                          [&](const IIDNormalShift& m) { return "normal(" + d(m.mu0) + "," + d(m.mu1) + "," + d(m.sigma) + ")"; },
                          [&](const IIDExponentialRate& m) { return "exponential(" + d(m.lambda0) + "," + d(m.lambda1) + ")"; },
                          [&](const AR1CorrShift& m) { return "ar1(" + d(m.rho0) + "," + d(m.rho1) + "," + d(m.noise_sd) + ")"; },
                          [&](const IIDBernoulli& m) { return "bernoulli(" + d(m.p0) + "," + d(m.p1) + ")"; },
                      },
                      f);
}

double log_sum_exp(std::span<const double> a) {
    double hi = kNegInf;
    for (double v : a) hi = std::max(hi, v);
    if (hi == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : a) s += std::exp(v - hi);
    return hi + std::log(s);
}

}  // namespace

ObservationModel::ObservationModel(Family family, double x0) : family_(std::move(family)), x0_(x0) {
    if (!std::isfinite(x0_)) throw InvalidInput("model: x0 must be finite");
    if (auto* mix = std::get_if<MixturePost>(&family_)) {
        if (mix->components.empty()) throw InvalidInput("mixture: at least one component required");
        double total = 0.0;
        for (const auto& c : mix->components) {
            validate(c.family);
            if (!(c.probability >= 0.0) || !std::isfinite(c.probability))
                throw InvalidInput("mixture: component probabilities must be nonnegative");
            if (!same_pre_law(c.family, mix->components.front().family))
                throw InvalidInput("mixture: components must share one pre-change law");
            total += c.probability;
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("mixture: probabilities must sum to 1");
        pre_ = mix->components.front().family;
        double cdf = 0.0;
        for (const auto& c : mix->components) {
            component_log_prob_.push_back(std::log(c.probability));
            cdf += c.probability;
            component_cdf_.push_back(cdf);
        }
        component_cdf_.back() = 1.0;
    } else {
        pre_ = std::visit(overloaded{
                              [](const MixturePost&) -> BaseFamily { return IIDNormalShift{}; },
                              [](const auto& f) -> BaseFamily { return f; },
                          },
                          family_);
        validate(pre_);
        component_log_prob_.push_back(0.0);
        component_cdf_.push_back(1.0);
    }
    markov_order_ = std::holds_alternative<AR1CorrShift>(pre_) ? 1 : 0;
    discrete_ = std::holds_alternative<IIDBernoulli>(pre_);
}

std::string ObservationModel::spec() const {
    if (const auto* mix = std::get_if<MixturePost>(&family_)) {
        std::string out = "mixture(";
        for (std::size_t i = 0; i < mix->components.size(); ++i) {
            if (i) out += ";";
            out += base_spec(mix->components[i].family) + "@" + format_double(mix->components[i].probability);
        }
        return out + ")";
    }
    return base_spec(pre_);
}

double ObservationModel::density_pre(double x, double prev) const { return std::exp(log_pre(pre_, x, prev)); }

double ObservationModel::density_post(double x, double prev, std::size_t component) const {
    if (const auto* mix = std::get_if<MixturePost>(&family_))
        return std::exp(log_post(mix->components.at(component).family, x, prev));
    return std::exp(log_post(pre_, x, prev));
}

double ObservationModel::component_log_lr(std::size_t i, double x, double prev) const {
    if (const auto* mix = std::get_if<MixturePost>(&family_)) return log_lr(mix->components.at(i).family, x, prev);
    return log_lr(pre_, x, prev);
}

double ObservationModel::log_lr_step(double x, double prev) const {
    if (k_dependent()) throw UnsupportedConfiguration("mixture likelihood ratio depends on the change point");
    return log_lr(pre_, x, prev);
}

double ObservationModel::log_likelihood_ratio(int k, int j, std::span<const double> window) const {
    if (k < 1 || j < k) throw InvalidInput("likelihood_ratio: need 1 <= k <= j");
    if (window.size() < static_cast<std::size_t>(j) + 1)
        throw InvalidInput("likelihood_ratio: window must hold x_0..x_j");
    if (!k_dependent()) return log_lr(pre_, window[j], window[j - 1]);

    // Lambda^{(k)}_j = p_k(x_{0:j}) / p_k(x_{0:j-1}) / p_0(x_j | past): ratio of
    // the mixture path likelihood ratios from k through j and through j - 1.
    const auto& comps = std::get<MixturePost>(family_).components;
    std::vector<double> upto_prev(comps.size()), upto_j(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        double s = 0.0;
        for (int m = k; m < j; ++m) s += log_lr(comps[i].family, window[m], window[m - 1]);
        upto_prev[i] = component_log_prob_[i] + s;
        upto_j[i] = upto_prev[i] + log_lr(comps[i].family, window[j], window[j - 1]);
    }
    return log_sum_exp(upto_j) - log_sum_exp(upto_prev);
}

double ObservationModel::likelihood_ratio(int k, int j, std::span<const double> window) const {
    const double r = std::exp(log_likelihood_ratio(k, j, window));
    if (!std::isfinite(r)) throw DomainError("likelihood ratio overflow");
    return r;
}

double ObservationModel::draw_innovation(Engine& rng) const {
    return std::visit(overloaded{
                          [&](const IIDExponentialRate&) { return std::exponential_distribution<double>(1.0)(rng); },
                          [&](const IIDBernoulli&) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); },
                          [&](const auto&) { return std::normal_distribution<double>(0.0, 1.0)(rng); },
                      },
                      pre_);
}

double ObservationModel::next_pre(double innovation, double prev) const { return apply_pre(pre_, innovation, prev); }

double ObservationModel::next_post(double innovation, double prev, std::size_t component) const {
    if (const auto* mix = std::get_if<MixturePost>(&family_))
        return apply_post(mix->components.at(component).family, innovation, prev);
    return apply_post(pre_, innovation, prev);
}

std::size_t ObservationModel::draw_component(Engine& rng) const {
    if (component_cdf_.size() == 1) return 0;
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::upper_bound(component_cdf_.begin(), component_cdf_.end(), u);
    return std::min<std::size_t>(it - component_cdf_.begin(), component_cdf_.size() - 1);
}

std::vector<ObservationNode> ObservationModel::pre_change_nodes(double prev, int count) const {
    std::vector<ObservationNode> out;
    std::visit(overloaded{
                   [&](const IIDNormalShift& m) {
                       const auto& r = quadrature::gauss_hermite(count);
                       for (std::size_t i = 0; i < r.nodes.size(); ++i)
                           out.push_back({m.mu0 + m.sigma * r.nodes[i], r.weights[i]});
                   },
                   [&](const AR1CorrShift& m) {
                       const auto& r = quadrature::gauss_hermite(count);
                       for (std::size_t i = 0; i < r.nodes.size(); ++i)
                           out.push_back({m.rho0 * prev + m.noise_sd * r.nodes[i], r.weights[i]});
                   },
                   [&](const IIDExponentialRate& m) {
                       const auto& r = quadrature::gauss_laguerre(count);
                       for (std::size_t i = 0; i < r.nodes.size(); ++i)
                           out.push_back({r.nodes[i] / m.lambda0, r.weights[i]});
                   },
                   [&](const IIDBernoulli& m) {
                       if (m.p0 < 1.0) out.push_back({0.0, 1.0 - m.p0});
                       if (m.p0 > 0.0) out.push_back({1.0, m.p0});
                   },
               },
               pre_);
    return out;
}

std::pair<double, double> ObservationModel::observation_range(double sds) const {
    return std::visit(overloaded{
                          [&](const IIDNormalShift& m) { return std::pair{m.mu0 - sds * m.sigma, m.mu0 + sds * m.sigma}; },
                          [&](const IIDExponentialRate& m) { return std::pair{0.0, (1.0 + sds) / m.lambda0}; },
                          [&](const AR1CorrShift& m) {
                              if (std::abs(m.rho0) >= 1.0)
                                  throw UnsupportedConfiguration("ar1: pre-change chain is not stationary");
                              const double sd = m.noise_sd / std::sqrt(1.0 - m.rho0 * m.rho0);
                              return std::pair{-sds * sd, sds * sd};
                          },
                          [&](const IIDBernoulli&) { return std::pair{0.0, 1.0}; },
                      },
                      pre_);
}

Trajectory sample_path(const ObservationModel& model, int change_point, int horizon, Engine& rng) {
    if (horizon < 2) throw InvalidInput("sample_path: horizon must be >= 2");
    if (change_point == kNoChange) change_point = horizon + 1;
    if (change_point < 1 || change_point > horizon + 1)
        throw InvalidInput("sample_path: change point must be in 1..N or NO_CHANGE");
    Trajectory t;
    t.change_point = change_point;
    t.values.resize(static_cast<std::size_t>(horizon) + 1);
    t.values[0] = model.x0();
    const std::size_t comp = model.draw_component(rng);
    for (int j = 1; j <= horizon; ++j) {
        const double u = model.draw_innovation(rng);
        t.values[j] = j < change_point ? model.next_pre(u, t.values[j - 1]) : model.next_post(u, t.values[j - 1], comp);
    }
    return t;
}

}  // namespace optcd
