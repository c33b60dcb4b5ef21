#pragma once

#include "mabfdr/confidence.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mabfdr {

/// Smallest reportable p-value; lower suprema are floored here.
inline constexpr double kPValueFloor = 1e-12;
inline constexpr int kPValueBisectionSteps = 60;

/// Whether alt's LCB at confidence gamma/2K stays at or below control's UCB at
/// gamma/2 plus epsilon. The set of gamma where this holds is an interval
/// starting at 0.
bool pvalue_condition_holds(const ArmStats& alt, const ArmStats& control, std::uint64_t num_alternatives,
                            double epsilon, double gamma);

/// Single-arm always-valid p-value: the largest gamma in (0,1] for which
/// pvalue_condition_holds. Returns 1 when the condition already holds at 1 and
/// the lower end of the final bisection bracket otherwise, floored at
/// kPValueFloor. Throws std::domain_error when either arm is unpulled.
double pvalue_single(const ArmStats& alt, const ArmStats& control, std::uint64_t num_alternatives,
                     double epsilon);

/// Running minimum over time and alternatives of the single-arm p-values.
struct PValueState {
    double current = 1.0;
    std::vector<double> per_arm_last;
    double epsilon = 0.0;
    std::uint64_t num_alternatives = 1;

    PValueState() = default;
    PValueState(std::uint64_t num_alternatives, double epsilon);

    /// Recomputes every single-arm p-value and folds their minimum into
    /// `current`. `alts` holds arms 1..K in order.
    [[nodiscard]] PValueState update(std::span<const ArmStats> alts, const ArmStats& control) const;

    /// Folds the same minimum into `current` without refreshing per_arm_last.
    /// An arm is inverted only when its condition fails at gamma = current,
    /// i.e. when it can actually lower the running minimum.
    void tighten(std::span<const ArmStats> alts, const ArmStats& control);
};

} // namespace mabfdr
