#include "optcd/simkit.hpp"

#include "optcd/error.hpp"
#include "optcd/format.hpp"
#include "optcd/parallel.hpp"
#include "optcd/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

namespace optcd {
namespace {

struct Sum {
    double s = 0.0;
    double ss = 0.0;

    void add(double v) {
        s += v;
        ss += v * v;
    }
    void merge(const Sum& o) {
        s += o.s;
        ss += o.ss;
    }
};

Estimate mean_of(const Sum& a, std::int64_t n) {
    Estimate e;
    e.n = n;
    if (n == 0) return e;
    e.value = a.s / n;
    if (n > 1) {
        const double var = std::max(0.0, (a.ss - a.s * e.value) / (n - 1));
        e.se = std::sqrt(var / n);
    }
    return e;
}

// Ratio of means with the delta-method standard error.
Estimate ratio_of(const Sum& num, const Sum& den, double cross, std::int64_t n) {
    Estimate e;
    e.n = n;
    if (n == 0 || den.s == 0.0) {
        e.n = 0;
        return e;
    }
    const double r = num.s / den.s;
    e.value = r;
    if (n > 1) {
        const double resid = std::max(0.0, num.ss - 2.0 * r * cross + r * r * den.ss);
        e.se = std::sqrt(resid / (n - 1) / n) / (den.s / n);
    }
    return e;
}

struct MeasureAcc {
    Sum gen;
    Sum direct;
    Sum ident;
    double cross = 0.0;  // sum of direct * gen
};

struct KAcc {
    Sum delay;          // (T_k - k)^+
    Sum survive;        // 1{T_0 >= k}
    double cross = 0.0;  // delay * survive
    Sum cond;           // conditional delay
    std::int64_t cond_n = 0;
};

struct BlockAcc {
    std::int64_t n = 0;
    Sum T;
    Sum no_alarm;
    std::vector<MeasureAcc> m;
    std::vector<KAcc> k;

    void merge(const BlockAcc& o) {
        n += o.n;
        T.merge(o.T);
        no_alarm.merge(o.no_alarm);
        for (std::size_t i = 0; i < m.size(); ++i) {
            m[i].gen.merge(o.m[i].gen);
            m[i].direct.merge(o.m[i].direct);
            m[i].ident.merge(o.m[i].ident);
            m[i].cross += o.m[i].cross;
        }
        for (std::size_t i = 0; i < k.size(); ++i) {
            k[i].delay.merge(o.k[i].delay);
            k[i].survive.merge(o.k[i].survive);
            k[i].cross += o.k[i].cross;
            k[i].cond.merge(o.k[i].cond);
            k[i].cond_n += o.k[i].cond_n;
        }
    }
};

}  // namespace

RunReport simulate(const Detector& detector, const ObservationModel& model, std::span<const WeightedPair> measures,
                   int horizon, const SimOptions& opt) {
    const int N = horizon;
    if (N < 2) throw InvalidInput("simulate: horizon must be >= 2");
    if (opt.reps < 1) throw InvalidInput("simulate: reps must be >= 1");
    if (opt.block < 1) throw InvalidInput("simulate: block size must be >= 1");
    if (opt.delays && !opt.direct) throw InvalidInput("simulate: delay profiles need the post-change branches");
    if (detector.schedule().horizon() != 0 && detector.schedule().horizon() != N)
        throw ConfigError("detector '" + detector.label() + "' limits were built for N = " +
                          std::to_string(detector.schedule().horizon()) + ", run uses N = " + std::to_string(N));

    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t M = measures.size();
    std::vector<StatisticKernel> kernels;
    kernels.reserve(M);
    for (const auto& p : measures) kernels.push_back(StatisticKernel::optimal(model, p, N));
    const StatisticKernel& stat = detector.statistic();
    const bool cusum_like = stat.cusum_like();
    const bool track_k = opt.direct;
    const bool condition = opt.delays && cusum_like;

    const std::int64_t blocks = (opt.reps + opt.block - 1) / opt.block;
    std::vector<BlockAcc> parts(blocks);

    parallel_for(static_cast<std::size_t>(blocks), opt.workers, [&](std::size_t b) {
        BlockAcc acc;
        acc.m.resize(M);
        if (track_k) acc.k.resize(N);
        const std::size_t len = static_cast<std::size_t>(N) + 1;
        std::vector<double> U(len), V(len), path(len), branch(len), ycond(len);
        std::vector<StatisticKernel::State> snaps(len);
        std::vector<std::vector<double>> ym(M, std::vector<double>(len));
        std::vector<StatisticKernel::State> ms(M);
        std::vector<double> gen(M), ident(M), direct(M);

        const std::int64_t first = static_cast<std::int64_t>(b) * opt.block;
        const std::int64_t last = std::min(opt.reps, first + opt.block);
        for (std::int64_t rep = first; rep < last; ++rep) {
            Engine rng = substream(opt.seed, static_cast<std::uint64_t>(rep));
            const std::size_t comp = model.draw_component(rng);
            for (int j = 1; j <= N; ++j) U[j] = model.draw_innovation(rng);
            if (track_k)
                for (int j = 1; j <= N; ++j) V[j] = model.draw_innovation(rng);

            // P_0 path up to the alarm.
            path[0] = model.x0();
            auto s = stat.start();
            snaps[0] = s;
            for (std::size_t i = 0; i < M; ++i) {
                ms[i] = kernels[i].start();
                ym[i][0] = ms[i].y;
                gen[i] = ident[i] = direct[i] = 0.0;
            }
            int T0 = N + 1;
            for (int n = 1; n <= N + 1; ++n) {
                const std::span<const double> hist(path.data(), n);
                for (std::size_t i = 0; i < M; ++i) {
                    gen[i] += measures[i].v({n, N, ym[i][n - 1], hist});
                    ident[i] += ym[i][n - 1];
                }
                if (n == N + 1) break;
                path[n] = model.next_pre(U[n], path[n - 1]);
                stat.step(s, path);
                if (track_k) snaps[n] = s;
                for (std::size_t i = 0; i < M; ++i) {
                    kernels[i].step(ms[i], path);
                    ym[i][n] = ms[i].y;
                }
                if (detector.alarm(n, N, s.y, path[n])) {
                    T0 = n;
                    break;
                }
            }
            // The conditioning event reads the statistic, which runs on past an alarm.
            if (condition) {
                for (int n = 0; n <= std::min(T0, N); ++n) ycond[n] = snaps[n].y;
                if (T0 < N) {
                    auto c = s;
                    std::copy(path.begin(), path.begin() + T0 + 1, branch.begin());
                    for (int n = T0 + 1; n < N; ++n) {
                        branch[n] = model.next_pre(U[n], branch[n - 1]);
                        stat.step(c, branch);
                        ycond[n] = c.y;
                    }
                }
            }

            if (track_k) {
                std::copy(path.begin(), path.begin() + std::min(T0, N) + 1, branch.begin());
                const int kmax = std::min(T0, N);
                for (int k = 1; k <= kmax; ++k) {
                    auto bs = snaps[k - 1];
                    int Tk = N + 1;
                    int written = k - 1;
                    for (int j = k; j <= N; ++j) {
                        branch[j] = model.next_post(V[j], branch[j - 1], comp);
                        written = j;
                        stat.step(bs, branch);
                        if (detector.alarm(j, N, bs.y, branch[j])) {
                            Tk = j;
                            break;
                        }
                    }
                    const double delay = Tk - k;
                    const std::span<const double> hist(path.data(), k);
                    for (std::size_t i = 0; i < M; ++i) direct[i] += measures[i].w({k, N, ym[i][k - 1], hist}) * delay;
                    auto& ka = acc.k[k - 1];
                    ka.delay.add(delay);
                    ka.survive.add(1.0);
                    ka.cross += delay;
                    if (!condition || ycond[k - 1] <= 1.0) {
                        ka.cond.add(delay);
                        ++ka.cond_n;
                    }
                    // Restore the pre-change values the branch overwrote.
                    for (int j = k; j <= written; ++j) branch[j] = j <= kmax ? path[j] : 0.0;
                }
                for (int k = kmax + 1; k <= N; ++k) {
                    auto& ka = acc.k[k - 1];
                    ka.delay.add(0.0);
                    ka.survive.add(0.0);
                    if (!condition || ycond[k - 1] <= 1.0) {
                        ka.cond.add(0.0);
                        ++ka.cond_n;
                    }
                }
            }

            ++acc.n;
            acc.T.add(T0);
            acc.no_alarm.add(T0 == N + 1 ? 1.0 : 0.0);
            for (std::size_t i = 0; i < M; ++i) {
                acc.m[i].gen.add(gen[i]);
                acc.m[i].ident.add(ident[i]);
                acc.m[i].direct.add(direct[i]);
                acc.m[i].cross += direct[i] * gen[i];
            }
        }
        parts[b] = std::move(acc);
    });

    BlockAcc total;
    total.m.resize(M);
    if (track_k) total.k.resize(N);
    for (const auto& p : parts) total.merge(p);

    RunReport rep;
    rep.detector = detector.label();
    rep.model = model.spec();
    rep.horizon = N;
    rep.reps = total.n;
    rep.seed = opt.seed;
    rep.arl0 = mean_of(total.T, total.n);
    rep.p_no_alarm = mean_of(total.no_alarm, total.n);
    for (std::size_t i = 0; i < M; ++i) {
        MeasureReport mr;
        mr.pair = measures[i].label();
        mr.gen_arl0 = mean_of(total.m[i].gen, total.n);
        mr.garl_identity = mean_of(total.m[i].ident, total.n);
        if (track_k) {
            mr.garl_direct = mean_of(total.m[i].direct, total.n);
            mr.j_ratio = ratio_of(total.m[i].direct, total.m[i].gen, total.m[i].cross, total.n);
        }
        rep.measures.push_back(mr);
    }
    if (opt.delays) {
        DelayProfile d;
        d.conditioned = condition;
        d.lorden.resize(N);
        d.pollak.resize(N);
        for (int k = 1; k <= N; ++k) {
            const auto& ka = total.k[k - 1];
            d.lorden[k - 1] = mean_of(ka.cond, ka.cond_n);
            d.pollak[k - 1] = ratio_of(ka.delay, ka.survive, ka.cross, total.n);
            // Sparse conditioning sets give ratios of a few paths; they are
            // reported but kept out of the maxima.
            const bool lorden_ok = ka.cond_n >= opt.min_conditioned && ka.cond_n > 0;
            const bool pollak_ok = ka.survive.s >= opt.min_conditioned && ka.survive.s > 0;
            if (!lorden_ok) d.undefined.push_back(k);
            if (!pollak_ok) d.pollak_undefined.push_back(k);
            if (lorden_ok && (d.lorden_argmax == 0 || d.lorden[k - 1].value > d.lorden_max.value)) {
                d.lorden_max = d.lorden[k - 1];
                d.lorden_argmax = k;
            }
            if (pollak_ok && (d.pollak_argmax == 0 || d.pollak[k - 1].value > d.pollak_max.value)) {
                d.pollak_max = d.pollak[k - 1];
                d.pollak_argmax = k;
            }
        }
        rep.delays = std::move(d);
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

Estimate estimate_arl0(const Detector& detector, const WeightedPair& pair, const ObservationModel& model, int horizon,
                       std::int64_t reps, std::uint64_t seed, int workers) {
    SimOptions o;
    o.reps = reps;
    o.seed = seed;
    o.workers = workers;
    o.direct = false;
    return simulate(detector, model, std::span(&pair, 1), horizon, o).measures[0].gen_arl0;
}

Estimate estimate_garl_direct(const Detector& detector, const WeightedPair& pair, const ObservationModel& model,
                              int horizon, std::int64_t reps_per_k, std::uint64_t seed, int workers) {
    SimOptions o;
    o.reps = reps_per_k;
    o.seed = seed;
    o.workers = workers;
    return simulate(detector, model, std::span(&pair, 1), horizon, o).measures[0].garl_direct;
}

Estimate estimate_garl_identity(const Detector& detector, const WeightedPair& pair, const ObservationModel& model,
                                int horizon, std::int64_t reps, std::uint64_t seed, int workers) {
    SimOptions o;
    o.reps = reps;
    o.seed = seed;
    o.workers = workers;
    o.direct = false;
    return simulate(detector, model, std::span(&pair, 1), horizon, o).measures[0].garl_identity;
}

DelayProfile delay_profiles(const Detector& detector, const ObservationModel& model, int horizon,
                            std::int64_t reps_per_k, std::uint64_t seed, int workers) {
    SimOptions o;
    o.reps = reps_per_k;
    o.seed = seed;
    o.workers = workers;
    o.delays = true;
    return *simulate(detector, model, {}, horizon, o).delays;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

void write_report_header(std::ostream& out) { out << "detector,metric,estimate,stderr,reps,seed\n"; }

void write_report_rows(std::ostream& out, const RunReport& r, bool profiles) {
    auto row = [&](const std::string& metric, const Estimate& e) {
        out << csv_field(r.detector) << "," << csv_field(metric) << "," << format_double(e.value) << ","
            << format_double(e.se) << "," << r.reps << "," << r.seed << "\n";
    };
    row("arl0", r.arl0);
    row("p_no_alarm", r.p_no_alarm);
    for (const auto& m : r.measures) {
        row("gen_arl0[" + m.pair + "]", m.gen_arl0);
        if (m.garl_direct.n > 0) row("garl_direct[" + m.pair + "]", m.garl_direct);
        row("garl_identity[" + m.pair + "]", m.garl_identity);
        if (m.j_ratio.n > 0) row("j_ratio[" + m.pair + "]", m.j_ratio);
    }
    if (r.delays) {
        const auto& d = *r.delays;
        row("lorden_max", d.lorden_max);
        row("lorden_argmax", Estimate{static_cast<double>(d.lorden_argmax), 0.0, 1});
        row("pollak_max", d.pollak_max);
        row("pollak_argmax", Estimate{static_cast<double>(d.pollak_argmax), 0.0, 1});
        if (profiles)
            for (std::size_t k = 0; k < d.lorden.size(); ++k) {
                row("lorden[" + std::to_string(k + 1) + "]", d.lorden[k]);
                row("pollak[" + std::to_string(k + 1) + "]", d.pollak[k]);
            }
    }
}

}  // namespace optcd
