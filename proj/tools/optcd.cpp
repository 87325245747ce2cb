// optcd: calibrate, evaluate, reproduce, oracle.
// Exit codes: 0 success, 2 precondition or config error, 3 missing artifact,
// 4 numerical failure, 1 anything else.

#include "optcd/calibration.hpp"
#include "optcd/config.hpp"
#include "optcd/error.hpp"
#include "optcd/format.hpp"
#include "optcd/limit_table_io.hpp"
#include "optcd/oracle.hpp"
#include "optcd/reproduce.hpp"
#include "optcd/simkit.hpp"
#include "optcd/spec_parser.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace optcd;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::int64_t> reps;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
    auto* opt = app->add_option("--config", c.config, "Experiment config file");
    if (needs_config) opt->required();
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--workers", c.workers, "Worker threads (0: all cores)");
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--reps", c.reps, "Override the replication count");
}

ExperimentConfig load(const Common& c) {
    auto cfg = load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.workers) cfg.workers = *c.workers;
    if (c.out) cfg.out_dir = *c.out;
    if (c.reps) cfg.reps = *c.reps;
    return cfg;
}

fs::path out_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    return f;
}

SimOptions sim_of(const ExperimentConfig& cfg) {
    SimOptions s;
    s.reps = cfg.reps;
    s.seed = cfg.seed;
    s.workers = cfg.workers;
    return s;
}

std::string slug(std::string s) {
    for (char& ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-') ch = '_';
    return s;
}

int cmd_calibrate(const Common& c) {
    const auto cfg = load(c);
    const auto model = cfg.model();
    const auto pair = cfg.pair();
    const auto dir = out_dir(cfg.out_dir);
    auto csv = open_out(dir / "calibration.csv");
    csv << "pair,target,c_gamma,achieved,stderr,iterations,converged,feasible_lo,feasible_hi,file\n";

    auto persist = [&](double cval, const std::string& tag) {
        const ValueGrid vg = backward_limits(model, pair, cval, cfg.horizon, cfg.grid);
        const fs::path file = dir / ("limits_" + slug(pair.label()) + "_" + tag + ".txt");
        save_limit_table(file, vg);
        if (pair.equivalent_limit_hypotheses()) {
            const auto eq = equivalent_limits(model, pair, vg, cfg.grid.fp_tol);
            save_limit_table(dir / ("limits_" + slug(pair.label()) + "_" + tag + "_equivalent.txt"), eq);
        }
        return file;
    };

    if (cfg.c) {
        const auto file = persist(*cfg.c, "c" + format_double(*cfg.c));
        csv << csv_field(pair.label()) << ",," << format_double(*cfg.c) << ",,,0,,,," << csv_field(file.string())
            << "\n";
        std::cout << "limits for c = " << format_double(*cfg.c) << " written to " << file.string() << "\n";
    }
    if (cfg.targets.empty() && !cfg.c) throw ConfigError("[run] needs targets or c for calibrate");
    for (double target : cfg.targets) {
        CalibrationOptions co;
        co.tolerance = cfg.tolerance;
        co.sim = sim_of(cfg);
        const auto r = calibrate(model, pair, target, cfg.horizon, cfg.grid, co);
        const auto file = persist(r.c_gamma, "g" + format_double(target));
        csv << csv_field(pair.label()) << "," << format_double(target) << "," << format_double(r.c_gamma) << ","
            << format_double(r.achieved_gamma) << "," << format_double(r.mc_stderr) << "," << r.iterations << ","
            << (r.converged ? "true" : "false") << "," << format_double(r.feasible_lo) << ","
            << format_double(r.feasible_hi) << "," << csv_field(file.string()) << "\n";
        std::cout << pair.label() << " target " << format_double(target) << ": c = " << format_double(r.c_gamma)
                  << ", achieved " << format_double(r.achieved_gamma) << " +- " << format_double(r.mc_stderr)
                  << (r.converged ? "" : " (not within tolerance)") << "\n";
        if (!r.converged) throw NumericalFailure("calibration did not reach the tolerance");
    }
    return 0;
}

int cmd_evaluate(const Common& c) {
    const auto cfg = load(c);
    const auto model = cfg.model();
    const auto measures = cfg.measure_pairs();
    const auto dir = out_dir(cfg.out_dir);
    auto csv = open_out(dir / "report.csv");
    write_report_header(csv);
    SimOptions sim = sim_of(cfg);
    sim.delays = cfg.delays;
    for (const auto& text : cfg.detectors) {
        const auto spec = parse_detector(text);
        std::optional<double> threshold;
        if (spec.gamma) {
            CalibrationOptions co;
            co.tolerance = cfg.tolerance;
            co.sim = sim;
            co.sim.direct = false;
            if (spec.name == "optimal") {
                threshold = calibrate(model, *spec.pair, *spec.gamma, cfg.horizon, cfg.grid, co).c_gamma;
            } else {
                if (measures.empty()) throw ConfigError("calibrating '" + text + "' needs a measure in [run] or [pair]");
                threshold = calibrate_detector(spec, model, measures.front(), *spec.gamma, cfg.horizon, co).c_gamma;
            }
        }
        const Detector det = build_detector(spec, model, cfg.horizon, cfg.grid, threshold);
        const auto report = simulate(det, model, measures, cfg.horizon, sim);
        write_report_rows(csv, report, cfg.profiles);
        std::cout << det.label() << ": arl0 " << format_double(report.arl0.value) << " (" << report.wall_seconds
                  << " s)\n";
    }
    return 0;
}

int cmd_reproduce(const std::string& preset, const Common& c) {
    ReproduceOptions o;
    o.reps = c.reps;
    o.seed = c.seed;
    o.workers = c.workers.value_or(0);
    o.log = [](const std::string& m) { std::cerr << m << "\n"; };
    const auto dir = out_dir(c.out.value_or("."));
    std::vector<std::string> presets;
    if (preset == "all") presets = preset_names();
    else presets = {preset};
    int failures = 0;
    for (const auto& p : presets) {
        const auto rep = reproduce(p, o);
        auto csv = open_out(dir / (p + ".csv"));
        write_comparison_csv(csv, rep);
        if (!rep.figure.empty()) {
            auto fig = open_out(dir / (rep.figure_name + ".csv"));
            write_figure_csv(fig, rep);
        }
        write_comparison_csv(std::cout, rep);
        std::cout << p << ": " << rep.failures() << " failing checks, " << rep.wall_seconds << " s\n";
        failures += rep.failures();
    }
    return 0;
}

int cmd_oracle(double p0, double p1, int horizon, const std::string& pair_text, const std::vector<double>& cs) {
    const auto pair = parse_pair(pair_text);
    bool all_equal = true;
    for (double c : cs) {
        const auto r = oracle_optimal(IIDBernoulli{p0, p1}, pair, to_rational(c), horizon);
        std::cout << "pair " << pair.label() << " c " << format_double(c) << " N " << horizon << ": dp " << r.dp_min
                  << " t* " << r.tstar_value;
        if (r.exhaustive) std::cout << " exhaustive " << *r.exhaustive << " over " << r.enumerated << " rules";
        std::cout << "\n";
        const bool eq = r.dp_min == r.tstar_value && (!r.exhaustive || *r.exhaustive == r.dp_min);
        std::cout << (eq ? (r.exhaustive ? "exhaustive = DP = T*" : "DP = T*") : "MISMATCH") << "\n";
        all_equal = all_equal && eq && r.tstar_dominates;
    }
    if (!all_equal) throw NumericalFailure("oracle values disagree");
    return 0;
}

int exit_code(const std::exception& e) {
    if (dynamic_cast<const MissingArtifact*>(&e)) return 3;
    if (dynamic_cast<const NumericalFailure*>(&e)) return 4;
    if (dynamic_cast<const InfeasibleTarget*>(&e)) return 2;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidInput*>(&e) ||
        dynamic_cast<const UnsupportedConfiguration*>(&e) || dynamic_cast<const DomainError*>(&e))
        return 2;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-horizon optimal change detection"};
    app.require_subcommand(1);

    Common cal_opts, eval_opts, rep_opts;
    auto* cal = app.add_subcommand("calibrate", "Calibrate c_gamma and write limit tables");
    add_common(cal, cal_opts, true);
    auto* eval = app.add_subcommand("evaluate", "Evaluate detectors by Monte Carlo");
    add_common(eval, eval_opts, true);
    auto* rep = app.add_subcommand("reproduce", "Run a reproduction preset");
    std::string preset;
    rep->add_option("preset", preset, "sec41 | sec42 | table1 | table2 | all")->required();
    add_common(rep, rep_opts, false);

    auto* orc = app.add_subcommand("oracle", "Exact optimality check on a Bernoulli tree");
    double p0 = 0.5, p1 = 0.75;
    int horizon = 3;
    std::string pair = "M2";
    std::vector<double> cs{1.0};
    orc->add_option("--p0", p0, "Pre-change P(X = 1)");
    orc->add_option("--p1", p1, "Post-change P(X = 1)");
    orc->add_option("--horizon", horizon, "N (1..4; exhaustive search for N <= 3)");
    orc->add_option("--pair", pair, "Weighted pair, M1..M6");
    orc->add_option("--c", cs, "Adjustment coefficients");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (*cal) return cmd_calibrate(cal_opts);
        if (*eval) return cmd_evaluate(eval_opts);
        if (*rep) return cmd_reproduce(preset, rep_opts);
        if (*orc) return cmd_oracle(p0, p1, horizon, pair, cs);
    } catch (const InfeasibleTarget& e) {
        std::cerr << "error: " << e.what() << "\nfeasible lower end " << format_double(e.lower()) << ", upper end "
                  << format_double(e.upper()) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    }
    return 0;
}
