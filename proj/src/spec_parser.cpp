#include "optcd/spec_parser.hpp"

#include "optcd/error.hpp"
#include "optcd/format.hpp"
#include "optcd/limit_table_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace optcd {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string strip_spaces(const std::string& s) {
    std::string out;
    for (char ch : s)
        if (!std::isspace(static_cast<unsigned char>(ch))) out += ch;
    return out;
}

// name(body) -> {name, body}; a bare word has an empty body.
std::pair<std::string, std::string> call_parts(const std::string& raw) {
    const std::string text = trim(raw);
    const auto open = text.find('(');
    if (open == std::string::npos) return {text, ""};
    if (text.back() != ')') throw InvalidInput("unbalanced parentheses in '" + text + "'");
    return {trim(text.substr(0, open)), text.substr(open + 1, text.size() - open - 2)};
}

// Small arithmetic evaluator: + - * / parentheses and sqrt().
class Expr {
public:
    explicit Expr(std::string s) : s_(strip_spaces(s)) {}

    double eval() {
        const double v = sum();
        if (pos_ != s_.size()) fail();
        return v;
    }

private:
    [[noreturn]] void fail() const { throw InvalidInput("cannot parse number '" + s_ + "'"); }

    double sum() {
        double v = product();
        while (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
            const char op = s_[pos_++];
            const double r = product();
            v = op == '+' ? v + r : v - r;
        }
        return v;
    }

    double product() {
        double v = unary();
        while (pos_ < s_.size() && (s_[pos_] == '*' || s_[pos_] == '/')) {
            const char op = s_[pos_++];
            const double r = unary();
            v = op == '*' ? v * r : v / r;
        }
        return v;
    }

    double unary() {
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            const char op = s_[pos_++];
            const double v = unary();
            return op == '-' ? -v : v;
        }
        return atom();
    }

    double atom() {
        if (s_.compare(pos_, 5, "sqrt(") == 0) {
            pos_ += 5;
            const double v = sum();
            if (pos_ >= s_.size() || s_[pos_] != ')') fail();
            ++pos_;
            return std::sqrt(v);
        }
        if (s_.compare(pos_, 3, "inf") == 0) {
            pos_ += 3;
            return std::numeric_limits<double>::infinity();
        }
        if (pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            const double v = sum();
            if (pos_ >= s_.size() || s_[pos_] != ')') fail();
            ++pos_;
            return v;
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc{}) fail();
        pos_ = p - s_.data();
        return v;
    }

    std::string s_;
    std::size_t pos_ = 0;
};

std::vector<double> parse_numbers(const std::string& body) {
    std::vector<double> out;
    for (const auto& tok : split_top(body, ',')) out.push_back(parse_real(tok));
    return out;
}

BaseFamily parse_base(const std::string& text) {
    const auto [name, body] = call_parts(text);
    const auto a = parse_numbers(body);
    auto need = [&](std::size_t n) {
        if (a.size() != n)
            throw InvalidInput("model '" + name + "' takes " + std::to_string(n) + " parameters, got " +
                               std::to_string(a.size()));
    };
    if (name == "normal") {
        need(3);
        return IIDNormalShift{a[0], a[1], a[2]};
    }
    if (name == "exponential") {
        need(2);
        return IIDExponentialRate{a[0], a[1]};
    }
    if (name == "ar1") {
        need(3);
        return AR1CorrShift{a[0], a[1], a[2]};
    }
    if (name == "bernoulli") {
        need(2);
        return IIDBernoulli{a[0], a[1]};
    }
    throw InvalidInput("unknown model family '" + name + "'");
}

// Parses "a", "a+b*k", "a+b*(k-m)", "a-b*(k+m)".
Segment parse_segment(const std::string& raw) {
    const std::string text = strip_spaces(raw);
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InvalidInput("segment '" + raw + "' needs 'lo-hi: expression'");
    const std::string range = text.substr(0, colon);
    const auto dash = range.find('-');
    Segment g;
    try {
        if (dash == std::string::npos) {
            g.from = g.to = std::stoi(range);
        } else {
            g.from = std::stoi(range.substr(0, dash));
            g.to = std::stoi(range.substr(dash + 1));
        }
    } catch (const std::exception&) {
        throw InvalidInput("segment range '" + range + "' is not 'lo-hi'");
    }
    std::string expr = text.substr(colon + 1);
    const auto kpos = expr.find('k');
    if (kpos == std::string::npos) {
        g.base = parse_real(expr);
        return g;
    }
    // Split "a(+|-)b*" from the k term.
    const auto star = expr.rfind('*', kpos);
    if (star == std::string::npos) throw InvalidInput("segment '" + raw + "': write the k term as b*k or b*(k-m)");
    std::size_t sign = std::string::npos;
    for (std::size_t i = star; i-- > 1;)
        if ((expr[i] == '+' || expr[i] == '-') && expr[i - 1] != 'e' && expr[i - 1] != 'E') {
            sign = i;
            break;
        }
    if (sign == std::string::npos) {
        g.base = 0.0;
        g.slope = parse_real(expr.substr(0, star));
    } else {
        g.base = parse_real(expr.substr(0, sign));
        g.slope = parse_real(expr.substr(sign, star - sign));
    }
    const std::string kterm = expr.substr(star + 1);
    if (kterm == "k") {
        g.anchor = 0.0;
    } else if (kterm.size() > 4 && kterm.compare(0, 2, "(k") == 0 && kterm.back() == ')') {
        g.anchor = -parse_real(kterm.substr(2, kterm.size() - 3));
    } else {
        throw InvalidInput("segment '" + raw + "': unsupported k term '" + kterm + "'");
    }
    return g;
}

std::vector<Segment> parse_segments(const std::string& body) {
    std::vector<Segment> out;
    for (const auto& s : split_top(body, ';'))
        if (!s.empty()) out.push_back(parse_segment(s));
    return out;
}

int threshold_slot(const std::string& name) {
    if (name == "cusum" || name == "cusum_ramp" || name == "shiryaev") return 0;
    if (name == "ewma" || name == "sr") return 1;
    return -1;
}

}  // namespace

std::vector<std::string> split_top(const std::string& text, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char ch : text) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (depth < 0) throw InvalidInput("unbalanced parentheses in '" + text + "'");
        if (ch == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (depth != 0) throw InvalidInput("unbalanced parentheses in '" + text + "'");
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

double parse_real(const std::string& text) { return Expr(text).eval(); }

Family parse_family(const std::string& text) {
    const auto [name, body] = call_parts(text);
    if (name != "mixture") return std::visit([](auto f) -> Family { return f; }, parse_base(text));
    MixturePost mix;
    for (const auto& part : split_top(body, ';')) {
        const auto at = part.rfind('@');
        if (at == std::string::npos) throw InvalidInput("mixture component '" + part + "' needs '@probability'");
        mix.components.push_back({parse_base(part.substr(0, at)), parse_real(part.substr(at + 1))});
    }
    return mix;
}

ObservationModel parse_model(const std::string& text, double x0) { return ObservationModel(parse_family(text), x0); }

Prior parse_prior(const std::string& text) {
    const auto [name, body] = call_parts(text);
    Prior p;
    if (name == "uniform" && body.empty()) return p;
    if (name == "geometric") {
        p.kind = Prior::Kind::Geometric;
        p.q = parse_real(body);
        return p;
    }
    if (name == "list") {
        p.kind = Prior::Kind::Explicit;
        p.values = parse_numbers(body);
        return p;
    }
    throw InvalidInput("unknown prior '" + text + "' (uniform, geometric(q) or list(...))");
}

WeightedPair parse_pair(const std::string& text) {
    const auto [name, body] = call_parts(text);
    const PairId id = parse_pair_id(name);
    PairParams params;
    for (const auto& tok : split_top(body, ',')) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            if (id == PairId::M5) {
                params.head_start = parse_real(tok);
                continue;
            }
            throw InvalidInput("pair parameter '" + tok + "' must be key=value");
        }
        const std::string key = trim(tok.substr(0, eq));
        const std::string val = trim(tok.substr(eq + 1));
        if (key == "r")
            params.head_start = parse_real(val);
        else if (key == "prior")
            params.prior = parse_prior(val);
        else
            throw InvalidInput("unknown pair parameter '" + key + "'");
    }
    return WeightedPair::builtin(id, params);
}

DetectorSpec parse_detector(const std::string& text) {
    DetectorSpec spec;
    spec.text = trim(text);
    const auto [name, body] = call_parts(spec.text);
    spec.name = name;
    static const char* known[] = {"cusum", "cusum_ramp", "cusum_dynamic", "ewma", "sr", "sr_dynamic", "shiryaev",
                                  "optimal"};
    if (std::find(std::begin(known), std::end(known), name) == std::end(known))
        throw InvalidInput("unknown detector '" + name + "'");

    std::vector<std::string> tokens = split_top(body, ',');
    std::string seg_body;
    if (name == "cusum_dynamic") {
        seg_body = body;
        tokens.clear();
    } else if (name == "sr_dynamic") {
        const auto comma = body.find(',');
        if (comma == std::string::npos) throw InvalidInput("sr_dynamic needs (r, segments)");
        tokens = {trim(body.substr(0, comma))};
        seg_body = body.substr(comma + 1);
    }
    // label= may trail a segment list too.
    if (!seg_body.empty()) {
        const auto lab = seg_body.find("label=");
        if (lab != std::string::npos) {
            spec.label = trim(seg_body.substr(lab + 6));
            seg_body = seg_body.substr(0, lab);
            while (!seg_body.empty() && (seg_body.back() == ',' || std::isspace(static_cast<unsigned char>(seg_body.back()))))
                seg_body.pop_back();
        }
        spec.segments = parse_segments(seg_body);
        if (spec.segments.empty()) throw InvalidInput(name + " needs at least one segment");
    }

    std::optional<PairId> pair_id;
    PairParams pair_params;
    std::optional<double> c_kw;
    std::string rule = "grid";
    for (const auto& tok : tokens) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            spec.args.push_back(parse_real(tok));
            continue;
        }
        const std::string key = trim(tok.substr(0, eq));
        const std::string val = trim(tok.substr(eq + 1));
        if (key == "gamma") {
            spec.gamma = parse_real(val);
            if (name != "optimal") spec.args.push_back(std::numeric_limits<double>::quiet_NaN());
        } else if (key == "label") {
            spec.label = val;
        } else if (key == "prior") {
            spec.prior = parse_prior(val);
            pair_params.prior = spec.prior;
        } else if (name == "optimal" && key == "pair") {
            pair_id = parse_pair_id(val);
        } else if (name == "optimal" && key == "c") {
            c_kw = parse_real(val);
        } else if (name == "optimal" && key == "r") {
            pair_params.head_start = parse_real(val);
        } else if (name == "optimal" && key == "file") {
            spec.file = val;
        } else if (name == "optimal" && key == "rule") {
            rule = val;
        } else {
            throw InvalidInput("detector " + name + ": unknown parameter '" + key + "'");
        }
    }

    auto need_args = [&](std::size_t n) {
        if (spec.args.size() != n)
            throw InvalidInput("detector " + name + " takes " + std::to_string(n) + " positional parameters, got " +
                               std::to_string(spec.args.size()));
    };
    if (name == "cusum" || name == "shiryaev") need_args(1);
    if (name == "cusum_ramp" || name == "ewma" || name == "sr") need_args(2);
    if (name == "sr_dynamic") need_args(1);
    if (name == "cusum_dynamic") need_args(0);

    if (const int slot = threshold_slot(name); slot >= 0) {
        const double t = spec.args[slot];
        if (!std::isnan(t)) spec.threshold = t;
        if (spec.gamma && spec.threshold) throw InvalidInput("detector " + name + ": give a threshold or gamma=, not both");
    }
    if (name == "optimal") {
        if (!pair_id) throw InvalidInput("optimal detector needs pair=M1..M7");
        if (*pair_id == PairId::M5 && !pair_params.head_start) pair_params.head_start = 0.0;
        spec.pair = WeightedPair::builtin(*pair_id, pair_params);
        const int sources = (c_kw ? 1 : 0) + (spec.gamma ? 1 : 0) + (spec.file.empty() ? 0 : 1);
        if (sources != 1) throw InvalidInput("optimal detector needs exactly one of c=, gamma=, file=");
        spec.threshold = c_kw;
        if (rule != "grid" && rule != "equivalent") throw InvalidInput("optimal detector: rule must be grid or equivalent");
        spec.equivalent_rule = rule == "equivalent";
        if (!spec.args.empty()) throw InvalidInput("optimal detector takes keyword parameters only");
    }
    return spec;
}

Detector build_detector(const DetectorSpec& spec, const ObservationModel& model, int horizon, const GridSpec& grid,
                        std::optional<double> threshold) {
    if (!threshold) threshold = spec.threshold;
    const bool needs_threshold = threshold_slot(spec.name) >= 0 || (spec.name == "optimal" && spec.file.empty());
    if (needs_threshold && !threshold)
        throw ConfigError("detector '" + spec.text + "' has gamma= and must be calibrated before use");
    std::string label = spec.label;
    auto with_label = [&](const std::string& fallback) { return label.empty() ? fallback : label; };
    const double t = threshold.value_or(0.0);
    const auto& a = spec.args;

    if (spec.name == "cusum")
        return Detector(with_label("cusum(" + format_double(t) + ")"), StatisticKernel::cusum(model),
                        LimitSchedule::constant(t));
    if (spec.name == "cusum_ramp")
        return Detector(with_label("cusum_ramp(" + format_double(t) + "," + format_double(a[1]) + ")"),
                        StatisticKernel::cusum(model), LimitSchedule::linear_ramp(t, a[1]));
    if (spec.name == "cusum_dynamic")
        return Detector(with_label(spec.text), StatisticKernel::cusum(model), LimitSchedule::piecewise(spec.segments));
    if (spec.name == "ewma")
        return Detector(with_label("ewma(" + format_double(a[0]) + "," + format_double(t) + ")"),
                        StatisticKernel::ewma(a[0]), LimitSchedule::constant(t));
    if (spec.name == "sr")
        return Detector(with_label("sr(" + format_double(a[0]) + "," + format_double(t) + ")"),
                        StatisticKernel::shiryaev_roberts(model, a[0]), LimitSchedule::constant(t));
    if (spec.name == "sr_dynamic")
        return Detector(with_label(spec.text), StatisticKernel::shiryaev_roberts(model, a[0]),
                        LimitSchedule::piecewise(spec.segments));
    if (spec.name == "shiryaev") {
        PairParams pp;
        pp.prior = spec.prior;
        const auto pair = WeightedPair::builtin(PairId::M1, pp);
        return Detector(with_label("shiryaev(" + format_double(t) + "," + spec.prior.spec() + ")"),
                        StatisticKernel::optimal(model, pair, horizon), LimitSchedule::constant(t));
    }
    if (spec.name == "optimal") {
        const WeightedPair& pair = *spec.pair;
        std::shared_ptr<const ValueGrid> vg;
        if (!spec.file.empty() && !threshold) {
            auto table = load_limit_table(spec.file);
            if (auto* eq = std::get_if<EquivalentLimitTable>(&table)) {
                auto ptr = std::make_shared<const EquivalentLimitTable>(std::move(*eq));
                if (ptr->horizon() != horizon) throw ConfigError("limit file horizon does not match the run");
                return make_optimal(model, pair, ptr, label);
            }
            vg = std::make_shared<const ValueGrid>(std::move(std::get<ValueGrid>(table)));
            if (vg->horizon() != horizon) throw ConfigError("limit file horizon does not match the run");
        } else {
            vg = std::make_shared<const ValueGrid>(backward_limits(model, pair, t, horizon, grid));
        }
        if (spec.equivalent_rule)
            return make_optimal(model, pair,
                                std::make_shared<const EquivalentLimitTable>(equivalent_limits(model, pair, *vg, grid.fp_tol)),
                                label);
        return make_optimal(model, pair, vg, label);
    }
    throw InvalidInput("unknown detector '" + spec.name + "'");
}

Detector make_baseline(const std::string& text, const ObservationModel& model, int horizon) {
    const auto spec = parse_detector(text);
    if (spec.name == "optimal") throw InvalidInput("make_baseline: '" + text + "' is not a baseline");
    return build_detector(spec, model, horizon);
}

}  // namespace optcd
