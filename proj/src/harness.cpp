#include "mabfdr/harness.hpp"

#include "mabfdr/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace mabfdr {

std::string_view to_string(Family f) {
    switch (f) {
    case Family::Gaussian:
        return "gaussian";
    case Family::Bernoulli:
        return "bernoulli";
    case Family::Caption:
        return "caption";
    case Family::UniformNullP:
        return "uniform-null-p";
    }
    return "?";
}

std::string_view to_string(Method m) {
    switch (m) {
    case Method::MabFdr:
        return "mab";
    case Method::AbFdr:
        return "ab";
    case Method::MabInd:
        return "mab-ind";
    }
    return "?";
}

Family parse_family(std::string_view text) {
    if (text == "gaussian")
        return Family::Gaussian;
    if (text == "bernoulli")
        return Family::Bernoulli;
    if (text == "caption")
        return Family::Caption;
    if (text == "uniform-null-p")
        return Family::UniformNullP;
    throw ConfigError("unknown family '" + std::string(text) + "'");
}

Method parse_method(std::string_view text) {
    if (text == "mab" || text == "mab-fdr")
        return Method::MabFdr;
    if (text == "ab" || text == "ab-fdr")
        return Method::AbFdr;
    if (text == "mab-ind")
        return Method::MabInd;
    throw ConfigError("unknown method '" + std::string(text) + "'");
}

double ScenarioConfig::resolved_best_mean() const {
    if (best_mean)
        return *best_mean;
    return family == Family::Bernoulli ? 0.4 : 8.0;
}

double ScenarioConfig::resolved_gap() const {
    if (gap)
        return *gap;
    return family == Family::Bernoulli ? 0.3 : 3.0;
}

void ScenarioConfig::validate() const {
    if (!(null_fraction >= 0.0 && null_fraction <= 1.0))
        throw ConfigError("null fraction must lie in [0,1]");
    if (runs == 0)
        throw ConfigError("at least one run is required");
    if (family != Family::Caption) {
        if (hypotheses == 0)
            throw ConfigError("at least one hypothesis is required");
        if (arms < 2)
            throw ConfigError("arms counts the control and must be >= 2");
    } else if (top_n < 2) {
        throw ConfigError("top-n must be >= 2");
    }
    if (!(epsilon >= 0.0))
        throw ConfigError("epsilon must be >= 0");
    const std::uint64_t arm_count = family == Family::Caption ? top_n : arms;
    if (truncation < arm_count)
        throw ConfigError("truncation must be at least the number of arms");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha must lie in (0,1)");
    if (family != Family::Caption) {
        const double best = resolved_best_mean();
        const double g = resolved_gap();
        if (!(g >= 0.0) || best - g < 0.0)
            throw ConfigError("gap must lie in [0, best mean]");
        if (family == Family::Bernoulli && (best > 1.0 || best < 0.0))
            throw ConfigError("Bernoulli best mean must lie in [0,1]");
    }
    // Constructing the state checks alpha / initial wealth consistency.
    FdrState(effective_fdr(), alpha, initial_wealth);
}

std::vector<Truth> assign_truth(std::uint64_t count, double null_fraction, std::uint64_t seed) {
    if (!(null_fraction >= 0.0 && null_fraction <= 1.0))
        throw ConfigError("null fraction must lie in [0,1]");
    // The small offset keeps e.g. 0.6 * 500 from rounding up to 301.
    const auto nulls = static_cast<std::uint64_t>(
        std::min<double>(static_cast<double>(count), std::ceil(null_fraction * static_cast<double>(count) - 1e-9)));
    std::vector<std::uint64_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    SeededStream stream(seed, 0, 0, 0, StreamPurpose::TruthLabels);
    for (std::uint64_t i = 0; i < nulls; ++i) {
        const std::uint64_t pick = i + stream.next_below(count - i);
        std::swap(order[i], order[pick]);
    }
    std::vector<Truth> truth(count, Truth::NonNull);
    for (std::uint64_t i = 0; i < nulls; ++i)
        truth[order[i]] = Truth::Null;
    return truth;
}

HypothesisSpec generate_means(const ScenarioConfig& config, std::uint64_t index, Truth truth,
                              SeededStream& stream) {
    (void)index;
    if (config.family == Family::Caption)
        throw ConfigError("caption hypotheses come from the dataset, not from generated means");
    const double best = config.resolved_best_mean();
    const double ceiling = best - config.resolved_gap();
    if (config.family == Family::Bernoulli && (best > 1.0 || ceiling < 0.0))
        throw ConfigError("Bernoulli means must lie in [0,1]");

    HypothesisSpec h;
    h.truth = truth;
    h.rewards = config.family == Family::Bernoulli ? RewardKind::Bernoulli : RewardKind::Gaussian;
    h.means.resize(config.arms);
    for (double& m : h.means)
        m = ceiling * stream.next_uniform();
    if (truth == Truth::Null) {
        h.means[0] = best;
    } else {
        const std::uint64_t winner = 1 + stream.next_below(config.arms - 1);
        h.means[winner] = best;
    }
    return h;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_double(const std::string& s, std::size_t line, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line) + ": cannot parse " + what + " '" + s + "'");
    }
}

} // namespace

CaptionDataset parse_captions(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    CaptionDataset data;
    std::map<std::string, std::size_t> index_of;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty() || line.front() == '#')
            continue;
        auto fields = split_csv_line(line);
        for (auto& f : fields)
            f = trim(f);
        if (!header_seen) {
            const std::vector<std::string> expected{"contest_id", "caption_id", "mean", "count"};
            if (fields != expected)
                throw DataError("line " + std::to_string(line_no) +
                                ": expected header contest_id,caption_id,mean,count");
            header_seen = true;
            continue;
        }
        if (fields.size() != 4)
            throw DataError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                            std::to_string(fields.size()));
        Caption c;
        c.id = fields[1];
        c.mean = parse_double(fields[2], line_no, "mean");
        const double count = parse_double(fields[3], line_no, "count");
        if (!(c.mean >= 0.0 && c.mean <= 1.0))
            throw DataError("line " + std::to_string(line_no) + ": mean " + fields[2] + " outside [0,1]");
        if (!(count >= 0.0) || count != std::floor(count))
            throw DataError("line " + std::to_string(line_no) + ": count must be a non-negative integer");
        c.count = static_cast<std::uint64_t>(count);
        auto [it, inserted] = index_of.try_emplace(fields[0], data.contests.size());
        if (inserted)
            data.contests.push_back(Contest{fields[0], {}});
        data.contests[it->second].captions.push_back(std::move(c));
    }
    if (!header_seen)
        throw DataError("caption file is empty");
    if (data.contests.empty())
        throw DataError("caption file has no rows");
    return data;
}

CaptionDataset load_captions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open caption file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_captions(buf.str());
}

Scenario caption_scenario(const CaptionDataset& dataset, const ScenarioConfig& config) {
    Scenario scenario;
    std::vector<std::vector<double>> pools;
    for (const Contest& contest : dataset.contests) {
        if (contest.captions.size() < config.top_n) {
            scenario.warnings.push_back("contest " + contest.id + " has " +
                                        std::to_string(contest.captions.size()) + " captions, fewer than " +
                                        std::to_string(config.top_n) + "; skipped");
            continue;
        }
        std::vector<double> means;
        means.reserve(contest.captions.size());
        for (const Caption& c : contest.captions)
            means.push_back(c.mean);
        std::stable_sort(means.begin(), means.end(), std::greater<>());
        means.resize(config.top_n);
        pools.push_back(std::move(means));
        if (config.hypotheses != 0 && pools.size() == config.hypotheses)
            break;
    }
    const auto truth = assign_truth(pools.size(), config.null_fraction, config.seed);
    for (std::size_t j = 0; j < pools.size(); ++j) {
        const auto& pool = pools[j]; // descending
        HypothesisSpec h;
        h.truth = truth[j];
        h.rewards = RewardKind::Bernoulli;
        if (truth[j] == Truth::Null) {
            h.means = pool;
        } else {
            h.means.push_back(pool.back());
            h.means.insert(h.means.end(), pool.begin(), pool.end() - 1);
        }
        scenario.hypotheses.push_back(std::move(h));
    }
    return scenario;
}

Scenario build_scenario(const ScenarioConfig& config, const CaptionDataset* captions) {
    config.validate();
    if (config.family == Family::Caption) {
        if (captions == nullptr)
            throw ConfigError("caption family needs a dataset");
        return caption_scenario(*captions, config);
    }
    Scenario scenario;
    const auto truth = assign_truth(config.hypotheses, config.null_fraction, config.seed);
    scenario.hypotheses.reserve(config.hypotheses);
    for (std::uint64_t j = 0; j < config.hypotheses; ++j) {
        SeededStream stream(config.seed, 0, j, 0, StreamPurpose::Means);
        scenario.hypotheses.push_back(generate_means(config, j, truth[j], stream));
    }
    return scenario;
}

RunRecords run_once(const ScenarioConfig& config, const Scenario& scenario, std::uint64_t run) {
    FdrState fdr(config.effective_fdr(), config.alpha, config.initial_wealth);
    RunRecords records;
    records.reserve(scenario.hypotheses.size());
    std::vector<ArmModel> models;
    for (std::uint64_t idx = 0; idx < scenario.hypotheses.size(); ++idx) {
        const HypothesisSpec& h = scenario.hypotheses[idx];
        const std::uint64_t j = fdr.next_index();
        const double alpha_j = fdr.next_alpha();

        ExperimentRecord rec;
        rec.j = j;
        rec.truth = h.truth;
        rec.alpha_j = alpha_j;
        rec.control_mean = h.means[0];
        rec.best_mean = *std::max_element(h.means.begin(), h.means.end());

        if (config.family == Family::UniformNullP && h.truth == Truth::Null) {
            SeededStream stream(config.seed, run, idx, 0, StreamPurpose::NullPValue);
            rec.pvalue = stream.next_uniform_open0();
            // No bandit runs; the nominal returned arm keeps the rejection rule uniform.
            rec.returned_arm = 1;
        } else {
            models.clear();
            for (double m : h.means)
                models.push_back(ArmModel{h.rewards, m, h.rewards == RewardKind::Gaussian ? 1.0 : 0.5});
            BanditConfig bc;
            bc.delta = alpha_j;
            if (bc.delta < kAlphaFloor) {
                std::clog << "warning: run " << run << " hypothesis " << j << ": alpha_j " << alpha_j
                          << " floored at " << kAlphaFloor << " for the bandit\n";
                bc.delta = kAlphaFloor;
            }
            bc.epsilon = config.epsilon;
            bc.truncation = config.truncation;
            auto streams = reward_streams(config.seed, run, idx, models.size());
            const BanditOutcome out = config.method == Method::AbFdr ? run_uniform(models, bc, streams)
                                                                     : run_lucb(models, bc, streams);
            rec.pvalue = out.final_pvalue;
            rec.returned_arm = out.returned_arm;
            rec.samples = out.stop_time;
            rec.truncated = out.truncated;
        }
        rec.returned_mean = h.means[std::min(rec.returned_arm, h.means.size() - 1)];
        rec.rejected = rec.pvalue <= alpha_j && rec.returned_arm != 0;
        fdr.record(rec.rejected);
        rec.wealth_after = fdr.wealth();
        records.push_back(rec);
    }
    return records;
}

std::vector<RunRecords> run_meta(const ScenarioConfig& config, const Scenario& scenario, const RunSink& sink) {
    config.validate();
    const std::uint64_t runs = config.runs;
    std::vector<RunRecords> results(runs);
    std::vector<char> done(runs, 0);
    std::uint64_t next_emit = 0;
    std::mutex emit_mutex;
    std::atomic<std::uint64_t> next_run{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            if (failed.load())
                return;
            const std::uint64_t r = next_run.fetch_add(1);
            if (r >= runs)
                return;
            try {
                RunRecords recs = run_once(config, scenario, r);
                std::lock_guard lock(emit_mutex);
                results[r] = std::move(recs);
                done[r] = 1;
                while (next_emit < runs && done[next_emit]) {
                    if (sink)
                        sink(next_emit, results[next_emit]);
                    ++next_emit;
                }
            } catch (...) {
                std::lock_guard lock(emit_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
                return;
            }
        }
    };

    unsigned jobs = config.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.jobs;
    jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, runs));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (unsigned i = 0; i < jobs; ++i)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
    return results;
}

} // namespace mabfdr
