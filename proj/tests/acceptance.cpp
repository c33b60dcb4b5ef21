// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Optional arguments select criteria by number.

#include "mabfdr/audit.hpp"
#include "mabfdr/bestarm.hpp"
#include "mabfdr/cli.hpp"
#include "mabfdr/harness.hpp"
#include "mabfdr/metrics.hpp"
#include "mabfdr/online_fdr.hpp"
#include "mabfdr/pvalue.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mabfdr;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const fs::path kOutRoot = MABFDR_TEST_TMPDIR;

std::vector<ArmModel> gaussian_arms(const std::vector<double>& means) {
    std::vector<ArmModel> arms;
    for (double m : means)
        arms.push_back(ArmModel::gaussian(m));
    return arms;
}

// 1: bisection p-value against a dense grid.
Verdict pvalue_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20170101);
    std::uniform_real_distribution<double> mean(-10.0, 10.0);
    std::uniform_int_distribution<std::uint64_t> pulls(1, 10000);
    std::uniform_int_distribution<std::uint64_t> arms(1, 50);
    double worst = 0.0;
    for (int c = 0; c < 100; ++c) {
        const double ma = mean(rng), m0 = mean(rng);
        const std::uint64_t na = pulls(rng), n0 = pulls(rng), k = arms(rng);
        const double eps = (c % 2) ? 0.1 : 0.0;
        const double p = pvalue_single(ArmStats::from_mean(ma, na), ArmStats::from_mean(m0, n0), k, eps);
        const double g = oracle::grid_pvalue(ma, static_cast<double>(na), m0, static_cast<double>(n0),
                                             static_cast<double>(k), eps);
        worst = std::max(worst, std::abs(p - g));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-4 && secs < 60.0, fmt("max |bisection - grid| = %.3g over 100 configs, %.1f s", worst, secs)};
}

// 2: always-validity under a tie null.
Verdict always_valid() {
    const std::vector<double> means(6, 5.0); // control and K = 5 alternatives
    const auto models = gaussian_arms(means);
    const int runs = 2000;
    const double limit = 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / runs);
    BanditConfig cfg;
    cfg.delta = 0.1;
    cfg.truncation = 5000;
    std::string detail;
    bool pass = true;
    for (bool adaptive : {true, false}) {
        int hits = 0;
        for (int run = 0; run < runs; ++run) {
            auto streams = reward_streams(2, run, adaptive ? 0 : 1, models.size());
            const auto out = adaptive ? run_lucb(models, cfg, streams) : run_uniform(models, cfg, streams);
            hits += out.final_pvalue <= 0.1;
        }
        const double rate = static_cast<double>(hits) / runs;
        pass = pass && rate <= limit;
        detail += fmt("%s %.4f ", adaptive ? "lucb" : "round-robin", rate);
    }
    return {pass, detail + fmt("(limit %.4f)", limit)};
}

// 3: LUCB returns the right answer under both cases.
Verdict lucb_correctness() {
    ScenarioConfig sc;
    sc.arms = 11;
    BanditConfig cfg;
    cfg.delta = 0.05;
    const int runs = 500;
    int null_ok = 0, alt_ok = 0;
    for (int run = 0; run < runs; ++run) {
        for (Truth truth : {Truth::Null, Truth::NonNull}) {
            SeededStream ms(3, run, truth == Truth::Null ? 0 : 1, 0, StreamPurpose::Means);
            const auto h = generate_means(sc, run, truth, ms);
            const auto models = gaussian_arms(h.means);
            auto streams = reward_streams(3, run, truth == Truth::Null ? 0 : 1, models.size());
            const auto out = run_lucb(models, cfg, streams);
            if (truth == Truth::Null) {
                null_ok += out.returned_arm == 0;
            } else {
                const std::vector<double> alts(h.means.begin() + 1, h.means.end());
                const auto s = target_set(alts, h.means[0], 0.0);
                alt_ok += std::find(s.begin(), s.end(), out.returned_arm) != s.end();
            }
        }
    }
    const double a = static_cast<double>(null_ok) / runs, b = static_cast<double>(alt_ok) / runs;
    return {a >= 0.92 && b >= 0.92, fmt("null returns control %.3f, alternative returns target %.3f", a, b)};
}

struct SimResult {
    fs::path dir;
    AggregateRow row;
};

std::vector<fs::path> emitted_audits;

SimResult simulate(const std::string& name, std::vector<std::string> args) {
    const fs::path dir = kOutRoot / name;
    fs::remove_all(dir);
    args.insert(args.begin(), "simulate");
    args.insert(args.end(), {"--out", dir.string(), "--scenario-id", name});
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0)
        throw std::runtime_error(name + ": simulate exited " + std::to_string(code) + ": " + err.str());
    emitted_audits.push_back(dir / "audit.csv");
    std::ifstream in(dir / "aggregate.csv");
    std::stringstream text;
    text << in.rdbuf();
    return {dir, parse_aggregate(text.str()).at(0)};
}

// 4: mFDR control under adversarial uniform null p-values.
Verdict mfdr_control() {
    const std::vector<std::string> base{"--family", "uniform-null-p", "--hyps", "500", "--arms", "30",
                                        "--truncation", "200", "--alpha", "0.1", "--runs", "80", "--seed", "4"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    const auto lord = simulate("c4_lord", with({"--method", "mab", "--fdr", "lord", "--null-fraction", "0.6"}));
    const auto bonf =
        simulate("c4_bonferroni", with({"--method", "mab", "--fdr", "bonferroni", "--null-fraction", "0.6"}));
    bool pass = lord.row.metrics.mfdr <= 0.12 && bonf.row.metrics.mfdr <= 0.12;

    // Rejection counts come from the audit itself.
    auto rejections = [](const SimResult& r) {
        const auto a = read_audit(r.dir / "audit.csv");
        return aggregate(a.runs, r.row.hypotheses, 0.0).mean_rejections;
    };
    const double lord_r = rejections(lord), bonf_r = rejections(bonf);
    pass = pass && bonf_r < lord_r;

    double worst_lord = lord.row.metrics.mfdr, worst_ind = 0.0;
    std::string grid;
    for (double pi1 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const std::string nf = fmt("%.1f", 1.0 - pi1);
        const auto ind = simulate(fmt("c4_ind_pi%.1f", pi1), with({"--method", "mab-ind", "--null-fraction", nf}));
        const auto lg = simulate(fmt("c4_lord_pi%.1f", pi1), with({"--method", "mab", "--null-fraction", nf}));
        worst_ind = std::max(worst_ind, ind.row.metrics.mfdr);
        worst_lord = std::max(worst_lord, lg.row.metrics.mfdr);
        grid += fmt(" %.1f:%.3f/%.3f", pi1, lg.row.metrics.mfdr, ind.row.metrics.mfdr);
    }
    pass = pass && worst_ind > 0.12 && worst_lord <= 0.12;
    return {pass, fmt("lord mFDR %.4f (%.1f rej), bonferroni %.4f (%.1f rej), max mab-ind %.4f; pi1 lord/ind:",
                      lord.row.metrics.mfdr, lord_r, bonf.row.metrics.mfdr, bonf_r, worst_ind) +
                      grid};
}

// 5: adaptive sampling beats uniform sampling on power and samples.
Verdict power_ordering() {
    const std::vector<std::string> base{"--family", "gaussian", "--hyps", "50", "--null-fraction", "0.6",
                                        "--runs", "20", "--alpha", "0.1", "--fdr", "lord", "--seed", "5"};
    auto run = [&](const std::string& method, std::uint64_t arms, std::uint64_t m) {
        auto a = base;
        a.insert(a.end(), {"--method", method, "--arms", std::to_string(arms), "--truncation", std::to_string(m)});
        return simulate(fmt("c5_%s_k%llu_m%llu", method.c_str(), static_cast<unsigned long long>(arms),
                            static_cast<unsigned long long>(m)),
                        a)
            .row.metrics;
    };
    bool pass = true;
    std::string detail = "bdr mab/ab:";
    for (std::uint64_t m : {100, 200, 300, 400}) {
        const auto mab = run("mab", 50, m), ab = run("ab", 50, m);
        pass = pass && mab.bdr >= ab.bdr;
        detail += fmt(" M%llu %.3f/%.3f", static_cast<unsigned long long>(m), mab.bdr, ab.bdr);
    }
    detail += "; samples mab/ab at M300:";
    for (std::uint64_t k : {30, 50}) {
        const auto mab = run("mab", k, 300), ab = run("ab", k, 300);
        const double ratio = mab.mean_samples / ab.mean_samples;
        pass = pass && ratio <= 0.8;
        detail += fmt(" arms%llu %.3f", static_cast<unsigned long long>(k), ratio);
    }
    return {pass, detail};
}

// 6: inverse-square gap scaling of the stopping time.
Verdict gap_scaling() {
    BanditConfig cfg;
    cfg.delta = 0.05;
    const int runs = 200;
    auto mean_stop = [&](double gap, std::uint64_t hyp) {
        const auto models = gaussian_arms({0.0, gap});
        double total = 0;
        for (int run = 0; run < runs; ++run) {
            auto streams = reward_streams(6, run, hyp, 2);
            total += static_cast<double>(run_lucb(models, cfg, streams).stop_time);
        }
        return total / runs;
    };
    const double narrow = mean_stop(0.5, 0), wide = mean_stop(1.0, 1);
    const double ratio = narrow / wide;
    return {ratio >= 2.5 && ratio <= 6.0,
            fmt("mean stop gap 0.5: %.1f, gap 1.0: %.1f, ratio %.3f", narrow, wide, ratio)};
}

// 7: FDR bookkeeping and replay of every emitted audit.
Verdict bookkeeping() {
    double gsum = 0.0;
    for (std::uint64_t j = 1; j <= 1000000; ++j)
        gsum += lord_gamma(j);

    FdrState b(FdrKind::Bonferroni, 0.1);
    double spent = 0.0, basel = 0.0;
    for (int j = 1; j <= 100000; ++j) {
        spent += b.next_alpha();
        basel += 1.0 / (static_cast<double>(j) * j);
        b.record(false);
    }
    const double bonf_err = std::abs(spent - 0.1 * 6.0 / (std::numbers::pi * std::numbers::pi) * basel);

    std::mt19937_64 rng(7);
    double min_wealth = 1.0;
    for (int h = 0; h < 10000; ++h) {
        std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        FdrState s(FdrKind::Lord, 0.1);
        for (int j = 0; j < 200; ++j) {
            s.next_alpha();
            s.record(coin(rng));
            min_wealth = std::min(min_wealth, s.wealth());
        }
    }

    if (emitted_audits.empty())
        simulate("c7_small", {"--family", "gaussian", "--hyps", "30", "--arms", "8", "--runs", "5",
                              "--truncation", "150", "--seed", "7"});
    std::size_t replayed = 0, rows = 0;
    for (const auto& path : emitted_audits) {
        const auto report = replay(read_audit(path));
        rows += report.rows_checked;
        replayed += report.consistent();
    }
    const bool pass = gsum <= 1.0 && bonf_err <= 1e-6 && min_wealth >= 0.0 && replayed == emitted_audits.size();
    return {pass, fmt("gamma sum %.6f, bonferroni error %.2g, min wealth %.6f, replay %zu/%zu files (%zu rows)", gsum,
                      bonf_err, min_wealth, replayed, emitted_audits.size(), rows)};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"1 p-value oracle equivalence", pvalue_oracle},
        {"2 always-validity", always_valid},
        {"3 LUCB correctness", lucb_correctness},
        {"4 mFDR control", mfdr_control},
        {"5 power and sample ordering", power_ordering},
        {"6 gap scaling", gap_scaling},
        {"7 FDR bookkeeping", bookkeeping},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::atoi(argv[i]));

    fs::create_directories(kOutRoot);
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(static_cast<int>(i + 1)))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        failures += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << criteria[i].first << "] " << v.detail
                  << fmt(" (%.1f s)", seconds_since(t0)) << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
