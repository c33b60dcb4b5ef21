#include "mabfdr/audit.hpp"

#include "mabfdr/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace mabfdr {

namespace {

std::string format_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

[[noreturn]] void bad_row(std::size_t line, const std::string& what) {
    throw DataError("line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size())
            return v;
    } catch (const std::exception&) {
    }
    bad_row(line, "not a number: '" + s + "'");
}

std::uint64_t to_u64(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used == s.size() && !s.empty() && s[0] != '-')
            return v;
    } catch (const std::exception&) {
    }
    bad_row(line, "not a non-negative integer: '" + s + "'");
}

bool to_flag(const std::string& s, std::size_t line) {
    if (s == "0")
        return false;
    if (s == "1")
        return true;
    bad_row(line, "expected 0 or 1, got '" + s + "'");
}

bool close_rel(double a, double b) {
    return std::abs(a - b) <= 2e-8 * std::max(std::abs(a), std::abs(b)) + 1e-300;
}

} // namespace

AuditMeta AuditMeta::from_config(const ScenarioConfig& config) {
    AuditMeta m;
    m.fdr = config.effective_fdr();
    m.alpha = config.alpha;
    m.initial_wealth = config.initial_wealth.value_or(config.alpha / 2.0);
    m.method = config.method;
    m.family = config.family;
    m.epsilon = config.epsilon;
    m.truncation = config.truncation;
    m.seed = config.seed;
    return m;
}

std::string format_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_audit_preamble(std::ostream& out, const AuditMeta& meta) {
    out << "# " << kAuditSchema << " fdr=" << to_string(meta.fdr) << " alpha=" << format_exact(meta.alpha)
        << " w0=" << format_exact(meta.initial_wealth) << " method=" << to_string(meta.method)
        << " family=" << to_string(meta.family) << " epsilon=" << format_exact(meta.epsilon)
        << " truncation=" << meta.truncation << " seed=" << meta.seed << '\n';
    out << kAuditHeader << '\n';
}

void write_audit_rows(std::ostream& out, std::uint64_t run, const RunRecords& records) {
    for (const ExperimentRecord& r : records) {
        out << run << ',' << r.j << ',' << (r.truth == Truth::Null ? "null" : "non-null") << ','
            << format_float(r.alpha_j) << ',' << format_float(r.pvalue) << ',' << (r.rejected ? 1 : 0) << ','
            << r.returned_arm << ',' << r.samples << ',' << (r.truncated ? 1 : 0) << ','
            << format_float(r.wealth_after) << ',' << format_float(r.returned_mean) << ','
            << format_float(r.control_mean) << ',' << format_float(r.best_mean) << '\n';
    }
}

AuditFile parse_audit(std::string_view text) {
    const auto lines = lines_of(text);
    std::size_t i = 0;
    while (i < lines.size() && lines[i].empty())
        ++i;
    if (i == lines.size())
        throw DataError("audit file is empty");

    const std::string prefix = "# " + std::string(kAuditSchema);
    if (lines[i].rfind(prefix, 0) != 0)
        throw DataError("line " + std::to_string(i + 1) + ": missing '" + prefix + "' schema line");

    AuditFile audit;
    std::map<std::string, std::string> kv;
    for (const auto& tok : split(std::string_view(lines[i]).substr(prefix.size()), ' ')) {
        if (tok.empty())
            continue;
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            bad_row(i + 1, "malformed schema token '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    for (const char* key : {"fdr", "alpha", "w0", "method", "family", "epsilon", "truncation", "seed"})
        if (!kv.count(key))
            bad_row(i + 1, std::string("schema line lacks '") + key + "'");
    try {
        audit.meta.fdr = parse_fdr_kind(kv["fdr"]);
        audit.meta.method = parse_method(kv["method"]);
        audit.meta.family = parse_family(kv["family"]);
    } catch (const ConfigError& e) {
        bad_row(i + 1, e.what());
    }
    audit.meta.alpha = to_double(kv["alpha"], i + 1);
    audit.meta.initial_wealth = to_double(kv["w0"], i + 1);
    audit.meta.epsilon = to_double(kv["epsilon"], i + 1);
    audit.meta.truncation = to_u64(kv["truncation"], i + 1);
    audit.meta.seed = to_u64(kv["seed"], i + 1);

    ++i;
    if (i == lines.size() || lines[i] != kAuditHeader)
        throw DataError("line " + std::to_string(i + 1) + ": expected header " + std::string(kAuditHeader));
    ++i;

    const std::size_t columns = split(kAuditHeader, ',').size();
    for (; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#')
            continue;
        const auto f = split(lines[i], ',');
        if (f.size() != columns)
            bad_row(i + 1, "expected " + std::to_string(columns) + " fields, got " + std::to_string(f.size()));
        const std::uint64_t run = to_u64(f[0], i + 1);
        ExperimentRecord r;
        r.j = to_u64(f[1], i + 1);
        if (f[2] == "null")
            r.truth = Truth::Null;
        else if (f[2] == "non-null")
            r.truth = Truth::NonNull;
        else
            bad_row(i + 1, "truth must be null or non-null");
        r.alpha_j = to_double(f[3], i + 1);
        r.pvalue = to_double(f[4], i + 1);
        r.rejected = to_flag(f[5], i + 1);
        r.returned_arm = to_u64(f[6], i + 1);
        r.samples = to_u64(f[7], i + 1);
        r.truncated = to_flag(f[8], i + 1);
        r.wealth_after = to_double(f[9], i + 1);
        r.returned_mean = to_double(f[10], i + 1);
        r.control_mean = to_double(f[11], i + 1);
        r.best_mean = to_double(f[12], i + 1);
        if (audit.run_ids.empty() || audit.run_ids.back() != run) {
            audit.run_ids.push_back(run);
            audit.runs.emplace_back();
        }
        audit.runs.back().push_back(r);
    }
    if (audit.runs.empty())
        throw DataError("audit file has no rows");
    return audit;
}

AuditFile read_audit(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open audit file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_audit(buf.str());
}

AggregateRow make_aggregate_row(const ScenarioConfig& config, std::string_view scenario_id,
                                const Scenario& scenario, const std::vector<RunRecords>& runs) {
    AggregateRow row;
    row.method = std::string(to_string(config.method));
    row.fdr_procedure = std::string(to_string(config.effective_fdr()));
    row.scenario_id = std::string(scenario_id);
    row.hypotheses = scenario.hypotheses.size();
    row.runs = runs.size();
    row.metrics = aggregate(runs, scenario.hypotheses.size(), config.epsilon);
    row.truncation = config.truncation;
    row.arms = scenario.hypotheses.empty() ? 0 : scenario.hypotheses.front().means.size();
    std::size_t non_null = 0;
    for (const auto& h : scenario.hypotheses)
        non_null += h.truth == Truth::NonNull;
    row.pi1 = scenario.hypotheses.empty()
                  ? 0.0
                  : static_cast<double>(non_null) / static_cast<double>(scenario.hypotheses.size());
    return row;
}

void write_aggregate_preamble(std::ostream& out) {
    out << "# " << kAggregateSchema << '\n' << kAggregateHeader << '\n';
}

void write_aggregate_row(std::ostream& out, const AggregateRow& row) {
    out << row.method << ',' << row.fdr_procedure << ',' << row.scenario_id << ',' << row.hypotheses << ','
        << row.runs << ',' << format_exact(row.metrics.mfdr) << ',' << format_exact(row.metrics.fdr_mean) << ','
        << format_exact(row.metrics.bdr) << ',' << format_exact(row.metrics.mean_samples) << ','
        << row.truncation << ',' << row.arms << ',' << format_exact(row.pi1) << '\n';
}

std::vector<AggregateRow> parse_aggregate(std::string_view text) {
    const auto lines = lines_of(text);
    std::size_t i = 0;
    while (i < lines.size() && lines[i].empty())
        ++i;
    if (i == lines.size())
        throw DataError("aggregate file is empty");
    if (lines[i] != "# " + std::string(kAggregateSchema))
        throw DataError("line " + std::to_string(i + 1) + ": missing aggregate schema line");
    ++i;
    if (i == lines.size() || lines[i] != kAggregateHeader)
        throw DataError("line " + std::to_string(i + 1) + ": expected header " + std::string(kAggregateHeader));
    std::vector<AggregateRow> rows;
    for (++i; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#')
            continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 12)
            bad_row(i + 1, "expected 12 fields");
        AggregateRow r;
        r.method = f[0];
        r.fdr_procedure = f[1];
        r.scenario_id = f[2];
        r.hypotheses = to_u64(f[3], i + 1);
        r.runs = to_u64(f[4], i + 1);
        r.metrics.mfdr = to_double(f[5], i + 1);
        r.metrics.fdr_mean = to_double(f[6], i + 1);
        r.metrics.bdr = to_double(f[7], i + 1);
        r.metrics.mean_samples = to_double(f[8], i + 1);
        r.truncation = to_u64(f[9], i + 1);
        r.arms = to_u64(f[10], i + 1);
        r.pi1 = to_double(f[11], i + 1);
        rows.push_back(std::move(r));
    }
    return rows;
}

ReplayReport replay(const AuditFile& audit) {
    ReplayReport report;
    for (std::size_t r = 0; r < audit.runs.size(); ++r) {
        const std::uint64_t run_id = audit.run_ids[r];
        FdrState fdr(audit.meta.fdr, audit.meta.alpha, audit.meta.initial_wealth);
        for (const ExperimentRecord& rec : audit.runs[r]) {
            ++report.rows_checked;
            auto level_mismatch = [&](std::string detail) {
                if (!report.first_level_mismatch)
                    report.first_level_mismatch = ReplayMismatch{run_id, rec.j, std::move(detail)};
            };
            if (rec.j != fdr.next_index()) {
                level_mismatch("hypothesis index " + std::to_string(rec.j) + " out of sequence, expected " +
                               std::to_string(fdr.next_index()));
                break;
            }
            const double expected_alpha = fdr.next_alpha();
            if (!close_rel(expected_alpha, rec.alpha_j))
                level_mismatch("alpha_j recorded " + format_float(rec.alpha_j) + ", recomputed " +
                               format_float(expected_alpha));

            const bool decision = rec.pvalue <= rec.alpha_j && rec.returned_arm != 0;
            if (decision != rec.rejected && !report.first_decision_mismatch)
                report.first_decision_mismatch =
                    ReplayMismatch{run_id, rec.j,
                                   "rejected=" + std::to_string(rec.rejected) + " but pvalue " +
                                       format_float(rec.pvalue) + " vs alpha_j " + format_float(rec.alpha_j) +
                                       " with returned arm " + std::to_string(rec.returned_arm)};

            fdr.record(rec.rejected);
            if (!close_rel(fdr.wealth(), rec.wealth_after) && !report.first_wealth_mismatch)
                report.first_wealth_mismatch = ReplayMismatch{run_id, rec.j, "wealth recorded " + format_float(rec.wealth_after) + ", recomputed " +
                               format_float(fdr.wealth())};
        }
    }
    return report;
}

std::string describe(const ReplayReport& report) {
    if (report.consistent())
        return "consistent (" + std::to_string(report.rows_checked) + " rows)";
    std::string out;
    auto line = [&](const char* kind, const ReplayMismatch& m) {
        out += std::string(kind) + " mismatch at run " + std::to_string(m.run_id) + " j " + std::to_string(m.j) +
               ": " + m.detail + "\n";
    };
    if (report.first_level_mismatch)
        line("level", *report.first_level_mismatch);
    if (report.first_wealth_mismatch)
        line("wealth", *report.first_wealth_mismatch);
    if (report.first_decision_mismatch)
        line("decision", *report.first_decision_mismatch);
    return out;
}

} // namespace mabfdr
