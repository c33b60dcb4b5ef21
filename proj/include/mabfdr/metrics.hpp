#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mabfdr {

enum class Truth { Null, NonNull };

/// One hypothesis of one Monte Carlo run.
struct ExperimentRecord {
    std::uint64_t j = 0;
    Truth truth = Truth::Null;
    double alpha_j = 0.0;
    double pvalue = 1.0;
    bool rejected = false;
    std::size_t returned_arm = 0;
    double returned_mean = 0.0;
    double control_mean = 0.0;
    /// Largest true mean over all arms, control included.
    double best_mean = 0.0;
    std::uint64_t samples = 0;
    bool truncated = false;
    double wealth_after = 0.0;
};

using RunRecords = std::vector<ExperimentRecord>;

/// False discovery proportion: rejected nulls / max(1, rejections).
double fdp(std::span<const ExperimentRecord> records);

/// Ratio of Monte Carlo means: E[rejected nulls] / (E[rejections] + 1), over the
/// first `hypotheses` records of each run.
double mfdr_estimate(std::span<const RunRecords> runs, std::size_t hypotheses);

/// Mean over runs of fdp of the first `hypotheses` records.
double fdr_mean(std::span<const RunRecords> runs, std::size_t hypotheses);

/// Share of non-null hypotheses rejected with an arm that is within epsilon of
/// the best mean and at least epsilon above control. 0 when there are no non-nulls.
double bdr(std::span<const ExperimentRecord> records, double epsilon);

/// Arms 1..K (1-based) whose mean is within epsilon of the best alternative and
/// strictly more than epsilon above the control.
std::vector<std::size_t> target_set(std::span<const double> alternative_means, double control_mean,
                                    double epsilon);

/// Gap quantities that drive the LUCB sample complexity.
struct GapDiagnostics {
    /// best mean minus mu_i; for the best arm itself, the gap to the runner-up.
    std::vector<double> deltas;
    std::vector<double> effective_gaps_null;
    std::vector<double> effective_gaps_alt;
    /// True when mu_0 > max_i mu_i - epsilon.
    bool null_case = false;
    /// sum_i g_i^-2 log(K max(log g_i^-2, 1) / delta) over the gaps of the
    /// applicable case; +inf when any of those gaps is not positive.
    double predicted_complexity = 0.0;
};

/// `arm_means[0]` is the control. Needs at least two arms and delta in (0,1).
GapDiagnostics gap_diagnostics(std::span<const double> arm_means, double epsilon, double delta);

/// Summary of a batch of runs over their first `hypotheses` records.
struct AggregateMetrics {
    double mfdr = 0.0;
    double fdr_mean = 0.0;
    double bdr = 0.0;
    double mean_samples = 0.0;
    double mean_rejections = 0.0;
    double mean_false_rejections = 0.0;
};

AggregateMetrics aggregate(std::span<const RunRecords> runs, std::size_t hypotheses, double epsilon);

} // namespace mabfdr
