#pragma once

#include <cstdint>

namespace mabfdr {

/// Pull count and running sum for one arm.
struct ArmStats {
    std::uint64_t pulls = 0;
    double sum = 0.0;

    void add(double reward) noexcept {
        ++pulls;
        sum += reward;
    }
    /// Throws std::domain_error for an unpulled arm.
    double mean() const;

    static ArmStats from_mean(double mean, std::uint64_t pulls) {
        return ArmStats{pulls, mean * static_cast<double>(pulls)};
    }
};

/// Largest confidence parameter at which the finite-LIL envelope is used;
/// larger values are clamped to it.
inline constexpr double kPhiDeltaCap = 0.1;

/// Anytime deviation envelope for the mean of n sub-Gaussian(1) samples:
///
///   phi_n(d) = sqrt((log(1/d) + 3 log log(1/d) + 1.5 log log(e n)) / n),  d = min(delta, 0.1)
///
/// Natural logs. Throws std::domain_error for n == 0 or delta outside (0,1).
double phi(std::uint64_t n, double delta);

/// The delta-dependent part of the radicand, log(1/d) + 3 log log(1/d) with
/// d = min(delta, 0.1). Exposed so hot loops can hoist it out of per-arm work.
double phi_delta_term(double delta);
/// phi given a precomputed phi_delta_term; n >= 1 is not checked.
double phi_from_term(std::uint64_t n, double delta_term) noexcept;

/// mean - phi(pulls, delta / 2K).
double lcb(const ArmStats& stats, double delta, std::uint64_t num_alternatives);
/// mean + phi(pulls, delta / 2).
double ucb(const ArmStats& stats, double delta);

} // namespace mabfdr
