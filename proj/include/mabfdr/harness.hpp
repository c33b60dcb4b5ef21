#pragma once

#include "mabfdr/bestarm.hpp"
#include "mabfdr/metrics.hpp"
#include "mabfdr/online_fdr.hpp"
#include "mabfdr/reward_models.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mabfdr {

enum class Family { Gaussian, Bernoulli, Caption, UniformNullP };
enum class Method { MabFdr, AbFdr, MabInd };

std::string_view to_string(Family f);
std::string_view to_string(Method m);
/// "gaussian", "bernoulli", "caption", "uniform-null-p". Throws ConfigError.
Family parse_family(std::string_view text);
/// "mab", "ab", "mab-ind" (long forms "mab-fdr", "ab-fdr" also accepted). Throws ConfigError.
Method parse_method(std::string_view text);

struct ScenarioConfig {
    Family family = Family::Gaussian;
    std::uint64_t hypotheses = 500;
    double null_fraction = 0.6;
    /// Total arms including the control (K + 1).
    std::uint64_t arms = 50;
    /// Defaults: 8 for Gaussian-valued families, 0.4 for Bernoulli.
    std::optional<double> best_mean;
    /// Gap between the best mean and the ceiling of the other means.
    /// Defaults: 3 for Gaussian-valued families, 0.3 for Bernoulli.
    std::optional<double> gap;
    double epsilon = 0.0;
    std::uint64_t truncation = 300;
    std::uint64_t runs = 100;
    std::uint64_t seed = 1;
    FdrKind fdr = FdrKind::Lord;
    Method method = Method::MabFdr;
    double alpha = 0.1;
    std::optional<double> initial_wealth;
    /// Caption family: number of top captions used as arms.
    std::uint64_t top_n = 10;
    unsigned jobs = 0; // 0 = hardware concurrency

    double resolved_best_mean() const;
    double resolved_gap() const;
    /// MabInd always tests at the fixed level alpha.
    FdrKind effective_fdr() const { return method == Method::MabInd ? FdrKind::Independent : fdr; }
    /// Throws ConfigError on inconsistent or out-of-range settings.
    void validate() const;
};

struct HypothesisSpec {
    Truth truth = Truth::Null;
    RewardKind rewards = RewardKind::Gaussian;
    /// True means; index 0 is the control.
    std::vector<double> means;
};

struct Scenario {
    std::vector<HypothesisSpec> hypotheses;
    std::vector<std::string> warnings;
};

/// ceil(null_fraction * count) nulls at uniformly chosen indices, drawn from
/// the scenario seed only.
std::vector<Truth> assign_truth(std::uint64_t count, double null_fraction, std::uint64_t seed);

/// Synthetic means for hypothesis `index` (0-based). Non-null: one alternative
/// at the best mean, the control and other alternatives Uniform[0, best - gap].
/// Null: the control at the best mean, alternatives Uniform[0, best - gap].
HypothesisSpec generate_means(const ScenarioConfig& config, std::uint64_t index, Truth truth,
                              SeededStream& stream);

struct Caption {
    std::string id;
    double mean = 0.0;
    std::uint64_t count = 0;
};

struct Contest {
    std::string id;
    std::vector<Caption> captions;
};

/// Contests in order of first appearance in the file.
struct CaptionDataset {
    std::vector<Contest> contests;
};

/// Reads a CSV with header contest_id,caption_id,mean,count. Throws DataError
/// with the line number for malformed rows or means outside [0,1].
CaptionDataset load_captions(const std::filesystem::path& path);
CaptionDataset parse_captions(std::string_view text);

/// One hypothesis per contest with at least top_n captions (others are skipped
/// with a warning). Nulls put the top caption in control; non-nulls put the
/// lowest of the top_n there. Arms are Bernoulli.
Scenario caption_scenario(const CaptionDataset& dataset, const ScenarioConfig& config);

/// Hypothesis sequence shared by every Monte Carlo run of `config`.
/// Caption scenarios need the dataset.
Scenario build_scenario(const ScenarioConfig& config, const CaptionDataset* captions = nullptr);

/// Called once per run, in run order, from a single thread.
using RunSink = std::function<void(std::uint64_t run, const RunRecords& records)>;

/// One Monte Carlo run of the meta-procedure over the whole hypothesis stream.
RunRecords run_once(const ScenarioConfig& config, const Scenario& scenario, std::uint64_t run);

/// All runs, executed on config.jobs threads; results are independent of the
/// thread count.
std::vector<RunRecords> run_meta(const ScenarioConfig& config, const Scenario& scenario,
                                 const RunSink& sink = {});

} // namespace mabfdr
