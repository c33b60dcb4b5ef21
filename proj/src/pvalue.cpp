#include "mabfdr/pvalue.hpp"

#include <algorithm>
#include <stdexcept>

namespace mabfdr {

namespace {

// alt LCB minus (control UCB + epsilon); non-decreasing in gamma.
double condition_gap(double alt_mean, std::uint64_t alt_pulls, double control_mean, std::uint64_t control_pulls,
                     double two_k, double epsilon, double gamma) {
    const double alt_width = phi_from_term(alt_pulls, phi_delta_term(gamma / two_k));
    const double control_width = phi_from_term(control_pulls, phi_delta_term(gamma / 2.0));
    return (alt_mean - alt_width) - (control_mean + control_width + epsilon);
}

void require_pulled(const ArmStats& s) {
    if (s.pulls == 0)
        throw std::domain_error("p-value of an unpulled arm");
}

} // namespace

bool pvalue_condition_holds(const ArmStats& alt, const ArmStats& control, std::uint64_t num_alternatives,
                            double epsilon, double gamma) {
    require_pulled(alt);
    require_pulled(control);
    const double two_k = 2.0 * static_cast<double>(num_alternatives);
    return condition_gap(alt.mean(), alt.pulls, control.mean(), control.pulls, two_k, epsilon, gamma) <= 0.0;
}

double pvalue_single(const ArmStats& alt, const ArmStats& control, std::uint64_t num_alternatives,
                     double epsilon) {
    require_pulled(alt);
    require_pulled(control);
    if (num_alternatives == 0)
        throw std::domain_error("p-value needs K >= 1");

    const double two_k = 2.0 * static_cast<double>(num_alternatives);
    const double am = alt.mean();
    const double cm = control.mean();
    auto holds = [&](double gamma) {
        return condition_gap(am, alt.pulls, cm, control.pulls, two_k, epsilon, gamma) <= 0.0;
    };

    if (holds(1.0))
        return 1.0;
    if (!holds(kPValueFloor))
        return kPValueFloor;

    double lo = kPValueFloor;
    double hi = 1.0;
    for (int step = 0; step < kPValueBisectionSteps; ++step) {
        const double mid = 0.5 * (lo + hi);
        if (holds(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

PValueState::PValueState(std::uint64_t k, double eps)
    : per_arm_last(k, 1.0), epsilon(eps), num_alternatives(k) {
    if (k == 0)
        throw std::domain_error("p-value state needs K >= 1");
}

PValueState PValueState::update(std::span<const ArmStats> alts, const ArmStats& control) const {
    if (alts.size() != num_alternatives)
        throw std::invalid_argument("p-value update: expected K alternative arms");
    PValueState next = *this;
    for (std::size_t i = 0; i < alts.size(); ++i) {
        next.per_arm_last[i] = pvalue_single(alts[i], control, num_alternatives, epsilon);
        next.current = std::min(next.current, next.per_arm_last[i]);
    }
    return next;
}

void PValueState::tighten(std::span<const ArmStats> alts, const ArmStats& control) {
    if (alts.size() != num_alternatives)
        throw std::invalid_argument("p-value update: expected K alternative arms");
    require_pulled(control);
    if (current <= kPValueFloor)
        return;

    const double two_k = 2.0 * static_cast<double>(num_alternatives);
    const double alt_term = phi_delta_term(current / two_k);
    const double control_bar =
        control.mean() + phi_from_term(control.pulls, phi_delta_term(current / 2.0)) + epsilon;
    for (const ArmStats& alt : alts) {
        require_pulled(alt);
        if (alt.mean() - phi_from_term(alt.pulls, alt_term) <= control_bar)
            continue;
        current = std::min(current, pvalue_single(alt, control, num_alternatives, epsilon));
    }
}

} // namespace mabfdr
