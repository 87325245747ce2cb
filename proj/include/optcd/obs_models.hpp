#pragma once

#include "optcd/random.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace optcd {

// X_j ~ N(mu0, sigma^2) before the change, N(mu1, sigma^2) from the change on.
struct IIDNormalShift {
    double mu0 = 0.0;
    double mu1 = 1.0;
    double sigma = 1.0;
};

// Exponential with rate lambda0 before, lambda1 after.
struct IIDExponentialRate {
    double lambda0 = 1.0;
    double lambda1 = 2.0;
};

// X_j = rho * X_{j-1} + noise_sd * eps_j with rho switching from rho0 to rho1.
struct AR1CorrShift {
    double rho0 = 0.5;
    double rho1 = 0.1;
    double noise_sd = 1.0;
};

// X_j in {0, 1} with P(X_j = 1) = p0 before, p1 after. Exists for exact
// enumeration on small trees; the likelihood ratio has atoms under P_0.
struct IIDBernoulli {
    double p0 = 0.5;
    double p1 = 0.75;
};

using BaseFamily = std::variant<IIDNormalShift, IIDExponentialRate, AR1CorrShift, IIDBernoulli>;

struct MixtureComponent {
    BaseFamily family;
    double probability = 0.0;
};

// Known post-change mixture: with probability `probability` the post-change law
// is that of component `family`. All components share one pre-change law.
struct MixturePost {
    std::vector<MixtureComponent> components;
};

using Family = std::variant<IIDNormalShift, IIDExponentialRate, AR1CorrShift, IIDBernoulli, MixturePost>;

// Accepted by sample_path in place of a change point: the whole path is drawn
// from P_0. Stored in a Trajectory as change_point = N + 1.
inline constexpr int kNoChange = -1;

struct Trajectory {
    std::vector<double> values;  // x_0 .. x_N
    int change_point = 0;        // 1..N, or N + 1 for no change

    int horizon() const noexcept { return static_cast<int>(values.size()) - 1; }
    bool has_change() const noexcept { return change_point <= horizon(); }
};

// One node of a quadrature rule for the law of X_{n+1} under P_0 given X_n.
struct ObservationNode {
    double x;
    double weight;
};

class ObservationModel {
public:
    explicit ObservationModel(Family family, double x0 = 0.0);

    const Family& family() const noexcept { return family_; }
    double x0() const noexcept { return x0_; }

    // 0 for i.i.d. families, 1 for AR1CorrShift; a mixture reports the order
    // of its components' conditionals but is change-point dependent.
    int markov_order() const noexcept { return markov_order_; }
    bool k_dependent() const noexcept { return std::holds_alternative<MixturePost>(family_); }
    bool discrete() const noexcept { return discrete_; }

    // Canonical spec string, e.g. "normal(0,0.2,1)"; parse_model() inverts it.
    std::string spec() const;

    // Conditional densities of X_j given X_{j-1} = prev (prev ignored when i.i.d.).
    // For a mixture, the post density of component `component`.
    double density_pre(double x, double prev) const;
    double density_post(double x, double prev, std::size_t component = 0) const;

    // Lambda^{(k)}_j for the window x_0..x_j (at least j + 1 values).
    double likelihood_ratio(int k, int j, std::span<const double> window) const;
    double log_likelihood_ratio(int k, int j, std::span<const double> window) const;

    // log Lambda of a single step for change-point independent models.
    double log_lr_step(double x, double prev) const;

    // Mixture components (a plain family is its own single component).
    std::size_t component_count() const noexcept { return component_log_prob_.size(); }
    double component_log_prob(std::size_t i) const { return component_log_prob_.at(i); }
    double component_log_lr(std::size_t i, double x, double prev) const;

    // Sampling through innovations: one draw per time step, mapped through the
    // pre- or post-change transition. Sharing innovations across laws gives the
    // common-random-number coupling used by the Monte Carlo engine.
    double draw_innovation(Engine& rng) const;
    double next_pre(double innovation, double prev) const;
    double next_post(double innovation, double prev, std::size_t component = 0) const;
    std::size_t draw_component(Engine& rng) const;

    // Quadrature for E_0[f(X_{n+1}) | X_n = prev]; exact for Bernoulli.
    std::vector<ObservationNode> pre_change_nodes(double prev, int count) const;

    // Interval covering `sds` marginal standard deviations of X under P_0.
    std::pair<double, double> observation_range(double sds) const;

private:
    const BaseFamily& pre_family() const noexcept { return pre_; }

    Family family_;
    BaseFamily pre_;
    double x0_;
    int markov_order_ = 0;
    bool discrete_ = false;
    std::vector<double> component_log_prob_;
    std::vector<double> component_cdf_;
};

Trajectory sample_path(const ObservationModel& model, int change_point, int horizon, Engine& rng);

inline double likelihood_ratio(const ObservationModel& model, int k, int j, std::span<const double> window) {
    return model.likelihood_ratio(k, j, window);
}

}  // namespace optcd
