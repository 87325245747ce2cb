#include "optcd/oracle.hpp"

#include "optcd/error.hpp"

#include <cmath>

namespace optcd {

Rational to_rational(double x) {
    if (!std::isfinite(x)) throw InvalidInput("oracle: non-finite parameter");
    return Rational(x);
}

double to_double(const Rational& x) { return x.convert_to<double>(); }

namespace {

Rational positive_part(const Rational& x) { return x > 0 ? x : Rational(0); }

int bit(std::uint32_t bits, int j) { return static_cast<int>((bits >> (j - 1)) & 1u); }

}  // namespace

BernoulliTree::BernoulliTree(const IIDBernoulli& model, const WeightedPair& pair, int horizon)
    : N_(horizon), id_(pair.id()) {
    if (horizon < 1 || horizon > 4) throw InvalidInput("oracle: horizon must be in 1..4");
    if (id_ == PairId::M7 || id_ == PairId::M8)
        throw UnsupportedConfiguration("oracle: pair " + pair.label() + " reads observations; use M1..M6");
    if (!(model.p0 > 0.0 && model.p0 < 1.0) || !(model.p1 >= 0.0 && model.p1 <= 1.0))
        throw InvalidInput("oracle: need 0 < p0 < 1 and 0 <= p1 <= 1");
    q1_ = to_rational(model.p0);
    r1_ = to_rational(model.p1);
    lr1_ = r1_ / q1_;
    lr0_ = (1 - r1_) / (1 - q1_);
    if (pair.params().head_start) r_ = to_rational(*pair.params().head_start);
    rho_.assign(N_ + 2, Rational(0));
    if (id_ == PairId::M1 || id_ == PairId::M3) {
        const Prior& p = pair.params().prior;
        for (int k = 1; k <= N_ + 1; ++k) {
            switch (p.kind) {
                case Prior::Kind::Uniform:
                    rho_[k] = Rational(1, N_ + 1);
                    break;
                case Prior::Kind::Geometric: {
                    const Rational q = to_rational(p.q);
                    Rational tail = 1;
                    for (int j = 1; j < k && j <= N_; ++j) tail *= 1 - q;
                    rho_[k] = k <= N_ ? q * tail : tail;
                    break;
                }
                case Prior::Kind::Explicit:
                    rho_[k] = to_rational(p.at(k, N_));
                    break;
            }
        }
    }
}

Rational BernoulliTree::w(int k, const Rational& y_prev) const {
    switch (id_) {
        case PairId::M1:
            return rho_[k];
        case PairId::M2:
        case PairId::M3:
            return k == 1 ? Rational(1) : Rational(0);
        case PairId::M4:
        case PairId::M6:
            return positive_part(1 - y_prev);
        case PairId::M5:
            return k == 1 ? r_ + 1 : Rational(1);
        default:
            break;
    }
    throw UnsupportedConfiguration("oracle: unsupported pair");
}

Rational BernoulliTree::v(int k, const Rational& y_prev) const {
    switch (id_) {
        case PairId::M1:
        case PairId::M3:
            return rho_[k];
        case PairId::M2:
            return k == N_ + 1 ? Rational(1) : Rational(0);
        case PairId::M4:
            return positive_part(1 - y_prev);
        case PairId::M5:
            return k == 1 ? r_ + 1 : Rational(1);
        case PairId::M6:
            return 1;
        default:
            break;
    }
    throw UnsupportedConfiguration("oracle: unsupported pair");
}

Rational BernoulliTree::limit(const Rational& c, int n, const Rational& y) const {
    if (n > N_) return 0;
    Rational l = c * v(n + 1, y);
    if (n == N_) return l;
    const Rational s = y + w(n + 1, y);
    for (int x = 0; x <= 1; ++x) {
        const Rational next = s * lambda(x);
        l += p0(x) * positive_part(limit(c, n + 1, next) - next);
    }
    return l;
}

namespace {

struct Solver {
    const BernoulliTree& t;
    const Rational& c;
    OracleResult& out;

    // Continuation value at depth n: Y_n - c v_{n+1} + E U_{n+1}.
    Rational dp(int n, std::uint32_t bits, const Rational& y) {
        Rational cont = y - c * t.v(n + 1, y);
        if (n < t.horizon())
            for (int x = 0; x <= 1; ++x)
                cont += t.p0(x) * dp(n + 1, bits | (static_cast<std::uint32_t>(x) << n), t.step(n + 1, y, x));
        if (n == 0) return cont;
        const bool stop = cont >= 0;
        out.stop_region[n][bits] = stop ? 1 : 0;
        return stop ? Rational(0) : cont;
    }

    // Every value of E[future increments] over adapted rules from this node.
    std::vector<Rational> all(int n, const Rational& y) {
        const Rational a = y - c * t.v(n + 1, y);
        std::vector<Rational> vals;
        if (n > 0) vals.emplace_back(0);
        if (n == t.horizon()) {
            vals.push_back(a);
            return vals;
        }
        const auto s0 = all(n + 1, t.step(n + 1, y, 0));
        const auto s1 = all(n + 1, t.step(n + 1, y, 1));
        vals.reserve(vals.size() + s0.size() * s1.size());
        for (const auto& u : s0)
            for (const auto& w : s1) vals.push_back(a + t.p0(0) * u + t.p0(1) * w);
        return vals;
    }
};

}  // namespace

TreeRule tstar_rule(const BernoulliTree& tree, const Rational& c) {
    return [tree, c](int n, std::uint32_t bits) {
        Rational y = 0;
        for (int j = 1; j <= n; ++j) y = tree.step(j, y, bit(bits, j));
        return y >= tree.limit(c, n, y);
    };
}

ExactMeasures exact_measures(const BernoulliTree& tree, const TreeRule& rule, const Rational& c) {
    const int N = tree.horizon();
    ExactMeasures m;
    for (std::uint32_t bits = 0; bits < (1u << N); ++bits) {
        std::vector<Rational> y(N + 1);
        for (int j = 1; j <= N; ++j) y[j] = tree.step(j, y[j - 1], bit(bits, j));
        int T = N + 1;
        for (int n = 1; n <= N; ++n)
            if (rule(n, bits & ((1u << n) - 1u))) {
                T = n;
                break;
            }
        Rational p = 1;
        for (int j = 1; j <= N; ++j) p *= tree.p0(bit(bits, j));
        for (int j = 1; j <= T; ++j) {
            const Rational vj = tree.v(j, y[j - 1]);
            m.gen_arl0 += p * vj;
            m.garl_identity += p * y[j - 1];
            m.lagrangian += p * (y[j - 1] - c * vj);
        }
        for (int k = 1; k < T; ++k) {
            Rational pk = 1;
            for (int j = 1; j <= N; ++j) pk *= j < k ? tree.p0(bit(bits, j)) : tree.p1(bit(bits, j));
            m.garl += pk * tree.w(k, y[k - 1]) * (T - k);
        }
    }
    return m;
}

OracleResult oracle_optimal(const IIDBernoulli& model, const WeightedPair& pair, const Rational& c, int horizon) {
    if (c < 0) throw InvalidInput("oracle: c must be >= 0");
    const BernoulliTree tree(model, pair, horizon);
    OracleResult out;
    out.stop_region.resize(horizon + 1);
    for (int n = 1; n <= horizon; ++n) out.stop_region[n].assign(std::size_t{1} << n, 0);
    Solver s{tree, c, out};
    out.dp_min = s.dp(0, 0, Rational(0));
    out.tstar_value = exact_measures(tree, tstar_rule(tree, c), c).lagrangian;
    if (horizon <= 3) {
        const auto vals = s.all(0, Rational(0));
        out.enumerated = vals.size();
        Rational best = vals.front();
        for (const auto& v : vals) {
            if (v < best) best = v;
            if (out.tstar_value > v) out.tstar_dominates = false;
        }
        out.exhaustive = best;
    }
    return out;
}

}  // namespace optcd
