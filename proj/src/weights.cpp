#include "optcd/weights.hpp"

#include "optcd/error.hpp"
#include "optcd/format.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace optcd {
namespace {

double logistic(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

double Prior::at(int k, int horizon) const {
    if (k < 1 || k > horizon + 1) throw InvalidInput("prior: index outside 1..N+1");
    switch (kind) {
        case Kind::Uniform:
            return 1.0 / (horizon + 1);
        case Kind::Geometric:
            return k <= horizon ? q * std::pow(1.0 - q, k - 1) : std::pow(1.0 - q, horizon);
        case Kind::Explicit:
            if (values.size() != static_cast<std::size_t>(horizon) + 1)
                throw InvalidInput("prior: explicit prior needs N+1 = " + std::to_string(horizon + 1) + " values, got " +
                                   std::to_string(values.size()));
            return values[k - 1];
    }
    return 0.0;
}

std::string Prior::spec() const {
    switch (kind) {
        case Kind::Uniform:
            return "uniform";
        case Kind::Geometric:
            return "geometric(" + format_double(q) + ")";
        case Kind::Explicit: {
            std::string s = "list(";
            for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + format_double(values[i]);
            return s + ")";
        }
    }
    return "";
}

WeightedPair WeightedPair::builtin(PairId id, PairParams params) {
    if (id == PairId::M1 || id == PairId::M3) {
        const Prior& p = params.prior;
        if (p.kind == Prior::Kind::Geometric && !(p.q > 0.0 && p.q < 1.0))
            throw InvalidInput("prior: geometric parameter must lie in (0, 1)");
        if (p.kind == Prior::Kind::Explicit) {
            if (p.values.empty()) throw InvalidInput("prior: explicit prior is empty");
            for (double v : p.values)
                if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("prior: entries must be nonnegative");
            const double total = std::accumulate(p.values.begin(), p.values.end(), 0.0);
            if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("prior: entries must sum to 1");
        }
    }
    WeightedPair pair(id, params);
    if (id == PairId::M5) {
        if (!params.head_start) throw InvalidInput("pair M5 requires the head start r");
        if (!(*params.head_start >= 0.0) || !std::isfinite(*params.head_start))
            throw InvalidInput("pair M5: head start r must be >= 0");
        pair.r_ = *params.head_start;
    }
    return pair;
}

std::string WeightedPair::label() const {
    switch (id_) {
        case PairId::M1:
        case PairId::M3:
            return to_string(id_) + "(" + params_.prior.spec() + ")";
        case PairId::M5:
            return "M5(r=" + format_double(r_) + ")";
        default:
            return to_string(id_);
    }
}

double WeightedPair::w(const WeightState& s) const {
    switch (id_) {
        case PairId::M1:
            return params_.prior.at(s.k, s.horizon);
        case PairId::M2:
        case PairId::M3:
            return s.k == 1 ? 1.0 : 0.0;
        case PairId::M4:
        case PairId::M6:
            return std::max(0.0, 1.0 - s.y_prev);
        case PairId::M5:
            return s.k == 1 ? r_ + 1.0 : 1.0;
        case PairId::M7:
            return s.k == 1 ? 1.0 : logistic(s.history[s.k - 1]);
        case PairId::M8: {
            if (s.k == 1) return 1.0;
            double sum = 0.0;
            for (int j = 1; j <= s.k - 1; ++j) sum += std::exp(s.history[j]);
            return sum / (s.k - 1);
        }
    }
    return 0.0;
}

double WeightedPair::v(const WeightState& s) const {
    switch (id_) {
        case PairId::M1:
        case PairId::M3:
            return params_.prior.at(s.k, s.horizon);
        case PairId::M2:
            return s.k == s.horizon + 1 ? 1.0 : 0.0;
        case PairId::M4:
            return std::max(0.0, 1.0 - s.y_prev);
        case PairId::M5:
            return s.k == 1 ? r_ + 1.0 : 1.0;
        case PairId::M6:
        case PairId::M8:
            return 1.0;
        case PairId::M7:
            return s.k == 1 ? 1.0 : logistic(s.history[s.k - 1]);
    }
    return 0.0;
}

int WeightedPair::w_order() const noexcept {
    if (id_ == PairId::M7) return 1;
    if (id_ == PairId::M8) return kNonMarkov;
    return 0;
}

int WeightedPair::v_order() const noexcept { return id_ == PairId::M7 ? 1 : 0; }

int WeightedPair::order() const noexcept {
    if (w_order() == kNonMarkov || v_order() == kNonMarkov) return kNonMarkov;
    return std::max(w_order(), v_order());
}

double WeightedPair::v_sup(int k, int horizon) const {
    switch (id_) {
        case PairId::M1:
        case PairId::M3:
            return params_.prior.at(k, horizon);
        case PairId::M2:
            return k == horizon + 1 ? 1.0 : 0.0;
        case PairId::M5:
            return k == 1 ? r_ + 1.0 : 1.0;
        default:
            return 1.0;
    }
}

PairId parse_pair_id(const std::string& text) {
    if (text.size() == 2 && (text[0] == 'M' || text[0] == 'm') && text[1] >= '1' && text[1] <= '8')
        return static_cast<PairId>(text[1] - '0');
    throw InvalidInput("unknown pair id '" + text + "' (expected M1..M8)");
}

std::string to_string(PairId id) { return "M" + std::to_string(static_cast<int>(id)); }

}  // namespace optcd
