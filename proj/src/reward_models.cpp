#include "mabfdr/reward_models.hpp"

#include "mabfdr/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mabfdr {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t absorb(std::uint64_t state, std::uint64_t word) noexcept {
    return splitmix64_mix(state ^ splitmix64_mix(word + kGoldenGamma));
}
} // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ArmModel ArmModel::gaussian(double mean) {
    ArmModel m{RewardKind::Gaussian, mean, 1.0};
    m.validate();
    return m;
}

ArmModel ArmModel::bernoulli(double mean) {
    ArmModel m{RewardKind::Bernoulli, mean, 0.5};
    m.validate();
    return m;
}

void ArmModel::validate() const {
    if (!std::isfinite(mean))
        throw ConfigError("arm mean must be finite");
    if (kind == RewardKind::Bernoulli && (mean < 0.0 || mean > 1.0))
        throw ConfigError("Bernoulli mean " + std::to_string(mean) + " outside [0,1]");
    if (kind == RewardKind::Gaussian && scale != 1.0)
        throw ConfigError("Gaussian arms must have unit scale");
}

SeededStream::SeededStream(std::uint64_t seed, std::uint64_t run, std::uint64_t hypothesis,
                           std::uint64_t arm, StreamPurpose purpose) {
    std::uint64_t k = splitmix64_mix(seed);
    k = absorb(k, static_cast<std::uint64_t>(purpose));
    k = absorb(k, run);
    k = absorb(k, hypothesis);
    k = absorb(k, arm);
    key_ = k;
}

std::uint64_t SeededStream::at(std::uint64_t index) const noexcept {
    return splitmix64_mix(key_ + (index + 1) * kGoldenGamma);
}

double SeededStream::next_uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededStream::next_normal() noexcept {
    const double u1 = next_uniform_open0();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SeededStream::next_below(std::uint64_t bound) noexcept {
    // Lemire-style rejection on the high product would need 128-bit; plain
    // modulo rejection is enough here.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

double draw(const ArmModel& model, SeededStream& stream) {
    model.validate();
    switch (model.kind) {
    case RewardKind::Bernoulli:
        return stream.next_uniform() < model.mean ? 1.0 : 0.0;
    case RewardKind::Gaussian:
        return model.mean + stream.next_normal();
    }
    return 0.0;
}

} // namespace mabfdr
