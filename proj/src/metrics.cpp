#include "mabfdr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mabfdr {

namespace {

std::span<const ExperimentRecord> prefix(const RunRecords& run, std::size_t hypotheses) {
    return std::span<const ExperimentRecord>(run).first(std::min(hypotheses, run.size()));
}

struct Counts {
    double rejections = 0;
    double false_rejections = 0;
};

Counts count(std::span<const ExperimentRecord> records) {
    Counts c;
    for (const auto& r : records) {
        if (!r.rejected)
            continue;
        c.rejections += 1;
        if (r.truth == Truth::Null)
            c.false_rejections += 1;
    }
    return c;
}

} // namespace

double fdp(std::span<const ExperimentRecord> records) {
    const Counts c = count(records);
    return c.false_rejections / std::max(1.0, c.rejections);
}

double mfdr_estimate(std::span<const RunRecords> runs, std::size_t hypotheses) {
    if (runs.empty())
        return 0.0;
    double false_total = 0, total = 0;
    for (const auto& run : runs) {
        const Counts c = count(prefix(run, hypotheses));
        false_total += c.false_rejections;
        total += c.rejections;
    }
    const double n = static_cast<double>(runs.size());
    return (false_total / n) / (total / n + 1.0);
}

double fdr_mean(std::span<const RunRecords> runs, std::size_t hypotheses) {
    if (runs.empty())
        return 0.0;
    double acc = 0;
    for (const auto& run : runs)
        acc += fdp(prefix(run, hypotheses));
    return acc / static_cast<double>(runs.size());
}

double bdr(std::span<const ExperimentRecord> records, double epsilon) {
    double non_null = 0, hits = 0;
    for (const auto& r : records) {
        if (r.truth != Truth::NonNull)
            continue;
        non_null += 1;
        if (r.rejected && r.returned_mean >= r.best_mean - epsilon && r.returned_mean >= r.control_mean + epsilon)
            hits += 1;
    }
    return non_null == 0 ? 0.0 : hits / non_null;
}

std::vector<std::size_t> target_set(std::span<const double> alternative_means, double control_mean,
                                    double epsilon) {
    std::vector<std::size_t> out;
    if (alternative_means.empty())
        return out;
    const double best = *std::max_element(alternative_means.begin(), alternative_means.end());
    for (std::size_t i = 0; i < alternative_means.size(); ++i) {
        const double m = alternative_means[i];
        if (m >= best - epsilon && m > control_mean + epsilon)
            out.push_back(i + 1);
    }
    return out;
}

GapDiagnostics gap_diagnostics(std::span<const double> arm_means, double epsilon, double delta) {
    const std::size_t n = arm_means.size();
    if (n < 2)
        throw std::invalid_argument("gap diagnostics need a control and an alternative");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("gap diagnostics: delta must lie in (0,1)");

    const std::size_t best =
        static_cast<std::size_t>(std::max_element(arm_means.begin(), arm_means.end()) - arm_means.begin());
    const double best_mean = arm_means[best];
    double runner_up = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (i != best)
            runner_up = std::max(runner_up, arm_means[i]);
    const double best_alt = *std::max_element(arm_means.begin() + 1, arm_means.end());
    const double control = arm_means[0];

    GapDiagnostics g;
    g.null_case = control > best_alt - epsilon;
    g.deltas.resize(n);
    g.effective_gaps_null.resize(n);
    g.effective_gaps_alt.resize(n);
    const double margin = best_alt - (control + epsilon);
    for (std::size_t i = 0; i < n; ++i) {
        g.deltas[i] = i == best ? best_mean - runner_up : best_mean - arm_means[i];
        g.effective_gaps_null[i] = i == 0 ? (control + epsilon) - best_alt : (control + epsilon) - arm_means[i];
        g.effective_gaps_alt[i] = i == 0 ? std::min(margin, std::max(g.deltas[0], epsilon))
                                         : std::max(g.deltas[i], std::min(margin, epsilon));
    }

    const auto& gaps = g.null_case ? g.effective_gaps_null : g.effective_gaps_alt;
    const double k = static_cast<double>(n - 1);
    double total = 0.0;
    for (double gap : gaps) {
        if (!(gap > 0.0)) {
            total = std::numeric_limits<double>::infinity();
            break;
        }
        const double inv_sq = 1.0 / (gap * gap);
        total += inv_sq * std::log(k * std::max(std::log(inv_sq), 1.0) / delta);
    }
    g.predicted_complexity = total;
    return g;
}

AggregateMetrics aggregate(std::span<const RunRecords> runs, std::size_t hypotheses, double epsilon) {
    AggregateMetrics a;
    if (runs.empty())
        return a;
    a.mfdr = mfdr_estimate(runs, hypotheses);
    a.fdr_mean = fdr_mean(runs, hypotheses);
    const double n = static_cast<double>(runs.size());
    for (const auto& run : runs) {
        const auto recs = prefix(run, hypotheses);
        a.bdr += bdr(recs, epsilon);
        const Counts c = count(recs);
        a.mean_rejections += c.rejections;
        a.mean_false_rejections += c.false_rejections;
        double samples = 0;
        for (const auto& r : recs)
            samples += static_cast<double>(r.samples);
        a.mean_samples += samples;
    }
    a.bdr /= n;
    a.mean_samples /= n;
    a.mean_rejections /= n;
    a.mean_false_rejections /= n;
    return a;
}

} // namespace mabfdr
