#pragma once

#include "mabfdr/harness.hpp"
#include "mabfdr/metrics.hpp"
#include "mabfdr/online_fdr.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mabfdr {

inline constexpr std::string_view kAuditSchema = "mabfdr-audit v1";
inline constexpr std::string_view kAggregateSchema = "mabfdr-aggregate v1";

/// Columns of the per-hypothesis audit CSV. The first ten are the published
/// contract; the trailing mean columns let metrics be recomputed offline.
inline constexpr std::string_view kAuditHeader =
    "run_id,j,truth,alpha_j,pvalue,rejected,returned_arm,samples,truncated,wealth_after,"
    "returned_mean,control_mean,best_mean";

inline constexpr std::string_view kAggregateHeader =
    "method,fdr_procedure,scenario_id,J,runs,mfdr,fdr_mean,bdr,mean_samples,truncation,arms,pi1";

/// Settings needed to replay the FDR levels of an audit file; written as a
/// `# mabfdr-audit v1 key=value ...` comment line ahead of the header.
struct AuditMeta {
    FdrKind fdr = FdrKind::Lord;
    double alpha = 0.1;
    double initial_wealth = 0.05;
    Method method = Method::MabFdr;
    Family family = Family::Gaussian;
    double epsilon = 0.0;
    std::uint64_t truncation = 0;
    std::uint64_t seed = 0;

    static AuditMeta from_config(const ScenarioConfig& config);
};

/// Floats at 9 significant digits.
std::string format_float(double v);

void write_audit_preamble(std::ostream& out, const AuditMeta& meta);
void write_audit_rows(std::ostream& out, std::uint64_t run, const RunRecords& records);

struct AuditFile {
    AuditMeta meta;
    std::vector<std::uint64_t> run_ids;
    /// Records grouped per run, in file order.
    std::vector<RunRecords> runs;
};

/// Throws DataError on an empty file, a missing/unknown schema line, a header
/// mismatch, or a malformed row.
AuditFile parse_audit(std::string_view text);
AuditFile read_audit(const std::filesystem::path& path);

struct AggregateRow {
    std::string method;
    std::string fdr_procedure;
    std::string scenario_id;
    std::uint64_t hypotheses = 0;
    std::uint64_t runs = 0;
    AggregateMetrics metrics;
    std::uint64_t truncation = 0;
    std::uint64_t arms = 0;
    double pi1 = 0.0;
};

AggregateRow make_aggregate_row(const ScenarioConfig& config, std::string_view scenario_id,
                                const Scenario& scenario, const std::vector<RunRecords>& runs);

/// Aggregate rows carry 17 significant digits so they round-trip exactly.
void write_aggregate_preamble(std::ostream& out);
void write_aggregate_row(std::ostream& out, const AggregateRow& row);
std::vector<AggregateRow> parse_aggregate(std::string_view text);

struct ReplayMismatch {
    std::uint64_t run_id = 0;
    std::uint64_t j = 0;
    std::string detail;
};

struct ReplayReport {
    std::size_t rows_checked = 0;
    /// First row whose recorded alpha_j disagrees with the level recomputed
    /// from the recorded rejections before it.
    std::optional<ReplayMismatch> first_level_mismatch;
    /// First row whose wealth_after disagrees with the recomputed wealth.
    std::optional<ReplayMismatch> first_wealth_mismatch;
    /// First row whose recorded rejection disagrees with (pvalue <= alpha_j and
    /// returned_arm != 0).
    std::optional<ReplayMismatch> first_decision_mismatch;

    bool consistent() const { return !first_level_mismatch && !first_wealth_mismatch && !first_decision_mismatch; }
};

ReplayReport replay(const AuditFile& audit);
std::string describe(const ReplayReport& report);

} // namespace mabfdr
