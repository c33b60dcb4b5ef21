#include "mabfdr/cli.hpp"

#include "mabfdr/audit.hpp"
#include "mabfdr/errors.hpp"
#include "mabfdr/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace mabfdr::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string family = "gaussian";
    std::uint64_t arms = 50;
    std::uint64_t hyps = 500;
    std::uint64_t runs = 100;
    double alpha = 0.1;
    std::string fdr = "lord";
    std::string method = "mab";
    std::uint64_t truncation = 300;
    std::uint64_t seed = 1;
    std::string out_dir;
    double null_fraction = 0.6;
    std::optional<double> best_mean;
    std::optional<double> gap;
    double epsilon = 0.0;
    std::optional<double> w0;
    std::string data;
    std::uint64_t top_n = 10;
    unsigned jobs = 0;
    std::string config_file;
    std::string scenario_id;
    bool verbose = false;

    std::string sweep_param;
    std::string sweep_values;
    std::string sweep_range;

    std::string audit_path;
};

void add_scenario_flags(CLI::App& sub, Options& o, bool lists) {
    sub.add_option("--family", o.family, "gaussian | bernoulli | caption | uniform-null-p")->capture_default_str();
    sub.add_option("--arms", o.arms, "arms per hypothesis, control included")->capture_default_str();
    sub.add_option("--hyps", o.hyps, "number of hypotheses J")->capture_default_str();
    sub.add_option("--runs", o.runs, "Monte Carlo runs")->capture_default_str();
    sub.add_option("--alpha", o.alpha, "target (m)FDR level")->capture_default_str();
    sub.add_option("--fdr", o.fdr,
                   lists ? "comma list of lord | lord15 | bonferroni | independent"
                         : "lord | lord15 | bonferroni | independent")
        ->capture_default_str();
    sub.add_option("--method", o.method, lists ? "comma list of mab | ab | mab-ind" : "mab | ab | mab-ind")
        ->capture_default_str();
    sub.add_option("--truncation", o.truncation, "maximum total pulls per hypothesis (M)")->capture_default_str();
    sub.add_option("--seed", o.seed, "scenario and reward seed (env MABFDR_SEED)")->capture_default_str();
    sub.add_option("--out", o.out_dir, "output directory")->required();
    sub.add_option("--null-fraction", o.null_fraction, "fraction of true nulls")->capture_default_str();
    sub.add_option("--best-mean", o.best_mean, "best arm mean (default 8 gaussian, 0.4 bernoulli)");
    sub.add_option("--gap", o.gap, "gap to the other means (default 3 gaussian, 0.3 bernoulli)");
    sub.add_option("--epsilon", o.epsilon, "precision slack")->capture_default_str();
    sub.add_option("--w0", o.w0, "initial LORD wealth (default alpha/2)");
    sub.add_option("--data", o.data, "caption CSV (contest_id,caption_id,mean,count)");
    sub.add_option("--top-n", o.top_n, "captions used as arms per contest")->capture_default_str();
    sub.add_option("--jobs", o.jobs, "worker threads (0 = all cores)")->capture_default_str();
    sub.add_option("--config", o.config_file, "key=value file; command-line flags take precedence");
    sub.add_option("--scenario-id", o.scenario_id, "label for the aggregate rows (default: family)");
    sub.add_flag("-v,--verbose", o.verbose, "progress on stderr");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

ScenarioConfig to_scenario(const Options& o, const std::string& method, const std::string& fdr) {
    ScenarioConfig c;
    c.family = parse_family(o.family);
    c.hypotheses = o.hyps;
    c.null_fraction = o.null_fraction;
    c.arms = c.family == Family::Caption ? o.top_n : o.arms;
    c.best_mean = o.best_mean;
    c.gap = o.gap;
    c.epsilon = o.epsilon;
    c.truncation = o.truncation;
    c.runs = o.runs;
    c.seed = o.seed;
    c.fdr = parse_fdr_kind(fdr);
    c.method = parse_method(method);
    c.alpha = o.alpha;
    c.initial_wealth = o.w0;
    c.top_n = o.top_n;
    c.jobs = o.jobs;
    c.validate();
    return c;
}

std::optional<CaptionDataset> load_data(const Options& o) {
    if (o.family != "caption")
        return std::nullopt;
    if (o.data.empty())
        throw ConfigError("--family caption needs --data");
    return load_captions(o.data);
}

fs::path prepare_out_dir(const Options& o) {
    const fs::path dir(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw ConfigError("cannot write " + path.string());
    return f;
}

std::string scenario_label(const Options& o) { return o.scenario_id.empty() ? o.family : o.scenario_id; }

int simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const ScenarioConfig config = to_scenario(o, o.method, o.fdr);
    const auto captions = load_data(o);
    const Scenario scenario = build_scenario(config, captions ? &*captions : nullptr);
    for (const auto& w : scenario.warnings)
        err << "warning: " << w << '\n';
    if (scenario.hypotheses.empty())
        throw DataError("no usable hypotheses in the scenario");

    const fs::path dir = prepare_out_dir(o);
    std::ofstream audit = open_output(dir / "audit.csv");
    write_audit_preamble(audit, AuditMeta::from_config(config));
    audit.flush();
    const auto runs = run_meta(config, scenario, [&](std::uint64_t run, const RunRecords& records) {
        write_audit_rows(audit, run, records);
        audit.flush();
        if (o.verbose)
            err << "run " << run + 1 << "/" << config.runs << " done\n";
    });

    const AggregateRow row = make_aggregate_row(config, scenario_label(o), scenario, runs);
    std::ofstream agg = open_output(dir / "aggregate.csv");
    write_aggregate_preamble(agg);
    write_aggregate_row(agg, row);

    out << "method=" << row.method << " fdr=" << row.fdr_procedure << " J=" << row.hypotheses
        << " runs=" << row.runs << " mfdr=" << format_float(row.metrics.mfdr)
        << " fdr_mean=" << format_float(row.metrics.fdr_mean) << " bdr=" << format_float(row.metrics.bdr)
        << " mean_samples=" << format_float(row.metrics.mean_samples) << '\n';
    out << "wrote " << (dir / "audit.csv").string() << " and " << (dir / "aggregate.csv").string() << '\n';
    return kOk;
}

std::vector<double> sweep_grid(const Options& o) {
    std::vector<double> grid;
    if (!o.sweep_values.empty() && !o.sweep_range.empty())
        throw ConfigError("use either --values or --range, not both");
    auto number = [](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size())
                return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("not a number in the sweep grid: '" + s + "'");
    };
    if (!o.sweep_values.empty()) {
        for (const auto& v : split_list(o.sweep_values))
            grid.push_back(number(v));
    } else if (!o.sweep_range.empty()) {
        std::vector<std::string> parts;
        std::stringstream in(o.sweep_range);
        std::string p;
        while (std::getline(in, p, ':'))
            parts.push_back(p);
        if (parts.size() != 3)
            throw ConfigError("--range expects from:to:step");
        const double from = number(parts[0]), to = number(parts[1]), step = number(parts[2]);
        if (!(step > 0.0))
            throw ConfigError("--range step must be positive");
        for (std::size_t k = 0;; ++k) {
            const double v = from + static_cast<double>(k) * step;
            if (v > to + 1e-9 * std::max(1.0, std::abs(to)))
                break;
            grid.push_back(v);
        }
    }
    if (grid.empty())
        throw ConfigError("sweep grid is empty");
    return grid;
}

std::uint64_t as_count(double v, const char* what) {
    if (!(v >= 0.0) || v != std::floor(v))
        throw ConfigError(std::string(what) + " values must be non-negative integers");
    return static_cast<std::uint64_t>(v);
}

int sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const auto grid = sweep_grid(o);
    const auto methods = split_list(o.method);
    const auto fdrs = split_list(o.fdr);
    if (methods.empty() || fdrs.empty())
        throw ConfigError("--method and --fdr need at least one entry");
    static const std::set<std::string> params{"truncation", "arms", "pi1", "hyps", "gap", "alpha"};
    if (!params.count(o.sweep_param))
        throw ConfigError("--param must be one of truncation, arms, pi1, hyps, gap, alpha");

    const auto captions = load_data(o);
    const fs::path dir = prepare_out_dir(o);
    std::ofstream csv = open_output(dir / "sweep.csv");
    write_aggregate_preamble(csv);

    std::set<std::pair<std::string, std::string>> seen;
    std::size_t rows = 0;
    for (const auto& method : methods) {
        for (const auto& fdr : fdrs) {
            ScenarioConfig base = to_scenario(o, method, fdr);
            const auto key = std::pair{std::string(to_string(base.method)), std::string(to_string(base.effective_fdr()))};
            if (!seen.insert(key).second)
                continue;
            for (double v : grid) {
                ScenarioConfig c = base;
                if (o.sweep_param == "truncation")
                    c.truncation = as_count(v, "truncation");
                else if (o.sweep_param == "arms")
                    c.arms = as_count(v, "arms");
                else if (o.sweep_param == "hyps")
                    c.hypotheses = as_count(v, "hyps");
                else if (o.sweep_param == "pi1")
                    c.null_fraction = 1.0 - v;
                else if (o.sweep_param == "gap")
                    c.gap = v;
                else if (o.sweep_param == "alpha")
                    c.alpha = v;
                if (c.family == Family::Caption && o.sweep_param == "arms")
                    c.top_n = c.arms;
                c.validate();
                const Scenario scenario = build_scenario(c, captions ? &*captions : nullptr);
                for (const auto& w : scenario.warnings)
                    err << "warning: " << w << '\n';
                if (scenario.hypotheses.empty())
                    throw DataError("no usable hypotheses at " + o.sweep_param + "=" + format_float(v));
                const auto runs = run_meta(c, scenario);
                write_aggregate_row(csv, make_aggregate_row(c, scenario_label(o), scenario, runs));
                csv.flush();
                ++rows;
                if (o.verbose)
                    err << key.first << "/" << key.second << " " << o.sweep_param << "=" << format_float(v)
                        << " done\n";
            }
        }
    }
    out << "wrote " << rows << " rows to " << (dir / "sweep.csv").string() << '\n';
    return kOk;
}

int replay_cmd(const Options& o, std::ostream& out) {
    const AuditFile audit = read_audit(o.audit_path);
    const ReplayReport report = replay(audit);
    out << describe(report);
    if (report.consistent()) {
        out << '\n';
        return kOk;
    }
    return kReplayMismatch;
}

/// key=value lines turned into "--key value" arguments.
std::vector<std::string> config_args(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path);
    std::vector<std::string> args;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty() || key == "config")
            throw ConfigError(path + ":" + std::to_string(line_no) + ": invalid key");
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

std::optional<std::string> find_flag_value(const std::vector<std::string>& args, const std::string& flag) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == flag && i + 1 < args.size())
            return args[i + 1];
        if (args[i].rfind(flag + "=", 0) == 0)
            return args[i].substr(flag.size() + 1);
    }
    return std::nullopt;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0)
            return true;
    return false;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Best-arm bandit experiments under online FDR control"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    auto* sim = app.add_subcommand("simulate", "run one scenario; writes audit.csv and aggregate.csv");
    add_scenario_flags(*sim, o, false);
    auto* sw = app.add_subcommand("sweep", "run a scenario over a grid of one parameter; writes sweep.csv");
    add_scenario_flags(*sw, o, true);
    sw->add_option("--param", o.sweep_param, "truncation | arms | pi1 | hyps | gap | alpha")->required();
    sw->add_option("--values", o.sweep_values, "comma-separated grid");
    sw->add_option("--range", o.sweep_range, "from:to:step grid");
    auto* rp = app.add_subcommand("replay", "recompute levels and decisions of an audit CSV");
    rp->add_option("audit", o.audit_path, "audit CSV path")->required();

    try {
        // Config-file entries go first so explicit flags (last one wins) override them.
        std::vector<std::string> full = args;
        if (!args.empty() && (args[0] == "simulate" || args[0] == "sweep")) {
            std::vector<std::string> user(args.begin() + 1, args.end());
            std::vector<std::string> merged{args[0]};
            if (auto cfg = find_flag_value(user, "--config")) {
                auto extra = config_args(*cfg);
                merged.insert(merged.end(), extra.begin(), extra.end());
            }
            if (!has_flag(user, "--seed")) {
                if (const char* env = std::getenv("MABFDR_SEED"); env && *env) {
                    merged.push_back("--seed");
                    merged.push_back(env);
                }
            }
            merged.insert(merged.end(), user.begin(), user.end());
            full = std::move(merged);
        }
        std::vector<std::string> reversed(full.rbegin(), full.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp&) {
            const auto subs = app.get_subcommands();
            out << (subs.empty() ? app.help() : subs.front()->help());
            return kOk;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << "\n" << app.help();
            return kConfigError;
        }

        if (sim->parsed())
            return simulate(o, out, err);
        if (sw->parsed())
            return sweep(o, out, err);
        return replay_cmd(o, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    }
}

} // namespace mabfdr::cli
