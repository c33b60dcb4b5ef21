#pragma once

#include "mabfdr/confidence.hpp"
#include "mabfdr/reward_models.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace mabfdr {

inline constexpr std::uint64_t kNoTruncation = std::numeric_limits<std::uint64_t>::max();

struct BanditConfig {
    double delta = 0.05;
    double epsilon = 0.0;
    /// Maximum total pulls across all arms.
    std::uint64_t truncation = kNoTruncation;

    /// Throws ConfigError for delta outside (0,1), negative epsilon, or a
    /// truncation that leaves no room for the initial round over num_arms arms.
    void validate(std::size_t num_arms) const;
};

struct BanditOutcome {
    std::size_t returned_arm = 0;
    std::uint64_t stop_time = 0;
    double final_pvalue = 1.0;
    std::vector<std::uint64_t> pulls_per_arm;
    bool truncated = false;
};

enum class StopKind { Continue, ReturnControl, ReturnArm };

struct Termination {
    StopKind kind = StopKind::Continue;
    std::size_t arm = 0;

    friend bool operator==(const Termination&, const Termination&) = default;
};

/// Stopping rule over arms 0..K (index 0 is the control). All argmaxes break
/// ties toward the lowest index. Throws std::domain_error when an arm is unpulled.
Termination check_termination(std::span<const ArmStats> all_stats, double delta, double epsilon);

/// Same rule on precomputed bounds, for callers that already hold them.
Termination check_termination_bounds(std::span<const double> means, std::span<const double> lcbs,
                                     std::span<const double> ucbs, double epsilon);

/// Called after each p-value update with (total pulls so far, running p-value).
using PValueObserver = std::function<void(std::uint64_t, double)>;

/// Best-arm identification with a control arm (LUCB sampling). `models[0]` is
/// the control; `streams[i]` feeds arm i.
BanditOutcome run_lucb(std::span<const ArmModel> models, const BanditConfig& config,
                       std::span<SeededStream> streams, const PValueObserver& observer = {});

/// Round-robin sampling over arms 0..K with the same stopping rule, evaluated
/// after each full round and once more on reaching the truncation.
BanditOutcome run_uniform(std::span<const ArmModel> models, const BanditConfig& config,
                          std::span<SeededStream> streams, const PValueObserver& observer = {});

/// Per-arm reward streams for one (run, hypothesis) pair.
std::vector<SeededStream> reward_streams(std::uint64_t seed, std::uint64_t run, std::uint64_t hypothesis,
                                         std::size_t num_arms);

} // namespace mabfdr
