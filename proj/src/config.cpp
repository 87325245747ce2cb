#include "optcd/config.hpp"

#include "optcd/error.hpp"
#include "optcd/spec_parser.hpp"

#include <fstream>
#include <istream>
#include <set>

namespace optcd {
namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// '#' starts a comment anywhere; ';' only at line start, since it also
// separates mixture components.
std::string without_comment(const std::string& line) {
    const std::string body = line.substr(0, line.find('#'));
    const std::string t = strip(body);
    return !t.empty() && t.front() == ';' ? "" : body;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidInput("expected true or false, got '" + v + "'");
}

long long parse_integer(const std::string& v) {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size()) throw InvalidInput("expected an integer, got '" + v + "'");
    return n;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
    ExperimentConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = strip(without_comment(line));
        if (text.empty()) continue;
        auto fail = [&](const std::string& msg) -> ConfigError {
            return ConfigError(source + ":line " + std::to_string(lineno) + ": " + msg);
        };
        if (text.front() == '[') {
            if (text.back() != ']') throw fail("unterminated section header");
            section = strip(text.substr(1, text.size() - 2));
            static const std::set<std::string> sections{"model", "pair", "detectors", "run", "grid", "output"};
            if (!sections.count(section)) throw fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw fail("expected key = value");
        const std::string key = strip(text.substr(0, eq));
        const std::string val = strip(text.substr(eq + 1));
        if (section.empty()) throw fail("key '" + key + "' outside a section");
        const std::string full = section + "." + key;
        if (full != "detectors.detector" && !seen.insert(full).second) throw fail("duplicate key '" + key + "'");
        if (val.empty()) throw fail("empty value for '" + key + "'");
        try {
            if (full == "model.family") cfg.family = val;
            else if (full == "model.params") cfg.params = val;
            else if (full == "model.x0") cfg.x0 = parse_real(val);
            else if (full == "pair.id") cfg.pair_id = parse_pair_id(val);
            else if (full == "pair.prior") cfg.prior = val;
            else if (full == "pair.r") cfg.head_start = parse_real(val);
            else if (full == "detectors.detector") {
                parse_detector(val);
                cfg.detectors.push_back(val);
            } else if (full == "run.horizon") cfg.horizon = static_cast<int>(parse_integer(val));
            else if (full == "run.reps") cfg.reps = parse_integer(val);
            else if (full == "run.seed") cfg.seed = std::stoull(val);
            else if (full == "run.workers") cfg.workers = static_cast<int>(parse_integer(val));
            else if (full == "run.targets") {
                for (const auto& t : split_top(val, ',')) cfg.targets.push_back(parse_real(t));
            } else if (full == "run.c") cfg.c = parse_real(val);
            else if (full == "run.measures") {
                for (const auto& m : split_top(val, ',')) {
                    parse_pair(m);
                    cfg.measures.push_back(m);
                }
            } else if (full == "run.tolerance") cfg.tolerance = parse_real(val);
            else if (full == "run.delays") cfg.delays = parse_bool(val);
            else if (full == "run.profiles") cfg.profiles = parse_bool(val);
            else if (full == "grid.y_knots") cfg.grid.y_knots = static_cast<int>(parse_integer(val));
            else if (full == "grid.y_min") cfg.grid.y_min = parse_real(val);
            else if (full == "grid.y_max") cfg.grid.y_max = parse_real(val);
            else if (full == "grid.x_knots") cfg.grid.x_knots = static_cast<int>(parse_integer(val));
            else if (full == "grid.x_sds") cfg.grid.x_sds = parse_real(val);
            else if (full == "grid.quad_nodes") cfg.grid.quad_nodes = static_cast<int>(parse_integer(val));
            else if (full == "grid.fp_tol") cfg.grid.fp_tol = parse_real(val);
            else if (full == "output.dir") cfg.out_dir = val;
            else throw fail("unknown key '" + key + "' in [" + section + "]");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw fail(std::string(e.what()));
        }
    }
    if (cfg.family.empty()) throw ConfigError(source + ": [model] family is required");
    if (cfg.params.empty()) throw ConfigError(source + ": [model] params is required");
    try {
        cfg.model();
        if (cfg.pair_id) cfg.pair();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(source + ": " + e.what());
    }
    if (cfg.horizon < 2) throw ConfigError(source + ": [run] horizon must be >= 2");
    if (cfg.reps < 1) throw ConfigError(source + ": [run] reps must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("cannot open config " + path.string());
    return parse_config(in, path.string());
}

ObservationModel ExperimentConfig::model() const { return parse_model(family + "(" + params + ")", x0); }

WeightedPair ExperimentConfig::pair() const {
    if (!pair_id) throw ConfigError("[pair] id is required for this command");
    PairParams p;
    if (!prior.empty()) p.prior = parse_prior(prior);
    p.head_start = head_start;
    if (*pair_id == PairId::M5 && !p.head_start) p.head_start = 0.0;
    return WeightedPair::builtin(*pair_id, p);
}

std::vector<WeightedPair> ExperimentConfig::measure_pairs() const {
    std::vector<WeightedPair> out;
    for (const auto& m : measures) out.push_back(parse_pair(m));
    if (out.empty() && pair_id) out.push_back(pair());
    return out;
}

}  // namespace optcd
