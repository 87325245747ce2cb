#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace optcd {

enum class PairId { M1 = 1, M2, M3, M4, M5, M6, M7, M8 };

// Trailing-observation count reported by a weight that reads the whole prefix.
inline constexpr int kNonMarkov = -1;

// Prior on the change point for M1/M3 (and the Shiryaev detector).
struct Prior {
    enum class Kind { Uniform, Geometric, Explicit };
    Kind kind = Kind::Uniform;
    double q = 0.0;              // Geometric: rho_k = q (1 - q)^(k-1), k <= N; rho_{N+1} = (1 - q)^N
    std::vector<double> values;  // Explicit: rho_1 .. rho_{N+1}

    // rho_k for a horizon N; validates an explicit prior against N.
    double at(int k, int horizon) const;
    std::string spec() const;
};

struct PairParams {
    Prior prior;
    std::optional<double> head_start;  // r for M5
};

// What w_k / v_k may read: Y_{k-1} and X_0 .. X_{k-1}, nothing later.
struct WeightState {
    int k = 1;
    int horizon = 0;
    double y_prev = 0.0;
    std::span<const double> history;  // x_0 .. x_{k-1}
};

class WeightedPair {
public:
    static WeightedPair builtin(PairId id, PairParams params = {});

    PairId id() const noexcept { return id_; }
    const PairParams& params() const noexcept { return params_; }
    // "M5(r=0)", "M1(uniform)", "M6", ...
    std::string label() const;

    double w(const WeightState& s) const;
    double v(const WeightState& s) const;

    // Number of trailing observations read by w and v (kNonMarkov for M8).
    int w_order() const noexcept;
    int v_order() const noexcept;
    int order() const noexcept;

    // True when y + w(y, a) is nondecreasing and v(y, a) non-increasing in y.
    bool equivalent_limit_hypotheses() const noexcept { return id_ != PairId::M8; }

    // Bounds of v_k over all states (limit grids use them to cap y).
    double v_sup(int k, int horizon) const;

    // Whether w_k / v_k read Y_{k-1}.
    bool w_reads_y() const noexcept { return id_ == PairId::M4 || id_ == PairId::M6; }
    bool v_reads_y() const noexcept { return id_ == PairId::M4; }

private:
    WeightedPair(PairId id, PairParams params) : id_(id), params_(std::move(params)) {}

    PairId id_;
    PairParams params_;
    double r_ = 0.0;
};

PairId parse_pair_id(const std::string& text);
std::string to_string(PairId id);

}  // namespace optcd
