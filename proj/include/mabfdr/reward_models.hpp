#pragma once

#include <cstdint>

namespace mabfdr {

enum class RewardKind { Gaussian, Bernoulli };

/// Reward distribution of one arm. Gaussian arms have unit variance.
struct ArmModel {
    RewardKind kind = RewardKind::Gaussian;
    double mean = 0.0;
    double scale = 1.0;

    static ArmModel gaussian(double mean);
    static ArmModel bernoulli(double mean);

    /// Throws ConfigError when the parameters are outside the family's support.
    void validate() const;
};

/// What a stream is used for. Keeps scenario generation, reward draws and
/// null p-value draws on disjoint key spaces.
enum class StreamPurpose : std::uint64_t {
    Rewards = 1,
    Means = 2,
    TruthLabels = 3,
    NullPValue = 4,
};

/// Counter-based random stream keyed by (seed, purpose, run, hypothesis, arm).
///
/// The n-th output is a pure function of the key and n: it is the SplitMix64
/// finalizer applied to key + (n + 1) * golden_gamma. Two streams with distinct
/// identities never share state, so the order in which arms or runs are
/// interleaved does not change any individual sequence.
class SeededStream {
public:
    SeededStream(std::uint64_t seed, std::uint64_t run, std::uint64_t hypothesis, std::uint64_t arm,
                 StreamPurpose purpose = StreamPurpose::Rewards);

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t position() const noexcept { return counter_; }

    /// Output at an absolute position; does not advance the stream.
    std::uint64_t at(std::uint64_t index) const noexcept;

    std::uint64_t next_u64() noexcept { return at(counter_++); }
    /// Uniform on [0, 1) with 53 bits of resolution.
    double next_uniform() noexcept;
    /// Uniform on (0, 1].
    double next_uniform_open0() noexcept { return 1.0 - next_uniform(); }
    /// Standard normal via Box-Muller (cosine branch only, two uniforms per draw).
    double next_normal() noexcept;
    /// Uniform integer in [0, bound) by rejection; bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// One reward from `model`, consuming the stream. Bernoulli rewards are exactly
/// 0.0 or 1.0.
double draw(const ArmModel& model, SeededStream& stream);

} // namespace mabfdr
