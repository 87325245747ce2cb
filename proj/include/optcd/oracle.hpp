#pragma once

#include "optcd/obs_models.hpp"
#include "optcd/weights.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace optcd {

using Rational = boost::multiprecision::cpp_rational;

// Exact arithmetic on the 2^N-leaf observation tree of an i.i.d. Bernoulli
// model. Supports pairs M1..M6; every input double is converted exactly.
class BernoulliTree {
public:
    BernoulliTree(const IIDBernoulli& model, const WeightedPair& pair, int horizon);

    int horizon() const noexcept { return N_; }
    Rational p0(int x) const { return x ? q1_ : 1 - q1_; }
    Rational p1(int x) const { return x ? r1_ : 1 - r1_; }
    Rational lambda(int x) const { return x ? lr1_ : lr0_; }

    // Weights at index k given Y_{k-1}.
    Rational w(int k, const Rational& y_prev) const;
    Rational v(int k, const Rational& y_prev) const;

    // Y_n after consuming x_n.
    Rational step(int n, const Rational& y_prev, int x) const { return (y_prev + w(n, y_prev)) * lambda(x); }

    // Exact l_n(c, y) from the limit recursion; l_{N+1} = 0.
    Rational limit(const Rational& c, int n, const Rational& y) const;

private:
    int N_;
    PairId id_;
    Rational q1_, r1_, lr0_, lr1_, r_;
    std::vector<Rational> rho_;  // index k, 1..N+1
};

// A stopping rule on the tree: stop(n, bits) for bits = x_1..x_n packed
// low bit first, 1 <= n <= N. T = N + 1 when it never stops.
using TreeRule = std::function<bool(int n, std::uint32_t bits)>;

struct OracleResult {
    Rational dp_min;                     // min_T E_0 xi_T by backward induction
    std::optional<Rational> exhaustive;  // minimum over all adapted rules (N <= 3)
    std::uint64_t enumerated = 0;        // number of rules enumerated
    bool tstar_dominates = true;         // E_0 xi_{T*} <= every enumerated value
    Rational tstar_value;                // E_0 xi_{T*}, T* from exact tree limits
    std::vector<std::vector<int>> stop_region;  // [n][bits]: 1 where the DP stops
};

// c >= 0, 1 <= N <= 4 (exhaustive part only for N <= 3).
OracleResult oracle_optimal(const IIDBernoulli& model, const WeightedPair& pair, const Rational& c, int horizon);

struct ExactMeasures {
    Rational gen_arl0;       // E_0 sum_{j <= T} v_j
    Rational garl;           // sum_k E_k w_k (T - k)^+
    Rational garl_identity;  // E_0 sum_{m <= T} Y_{m-1}
    Rational lagrangian;     // E_0 xi_T at the given c
};

ExactMeasures exact_measures(const BernoulliTree& tree, const TreeRule& rule, const Rational& c);

// T*: stop when Y_n >= l_n(c, Y_n).
TreeRule tstar_rule(const BernoulliTree& tree, const Rational& c);

Rational to_rational(double x);
double to_double(const Rational& x);

}  // namespace optcd
