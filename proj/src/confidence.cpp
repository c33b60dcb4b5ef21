#include "mabfdr/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mabfdr {

double ArmStats::mean() const {
    if (pulls == 0)
        throw std::domain_error("mean of an unpulled arm");
    return sum / static_cast<double>(pulls);
}

double phi_delta_term(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("phi: delta must lie in (0,1)");
    const double log_inv = std::log(1.0 / std::min(delta, kPhiDeltaCap));
    return log_inv + 3.0 * std::log(log_inv);
}

double phi_from_term(std::uint64_t n, double delta_term) noexcept {
    const double nd = static_cast<double>(n);
    // log(log(e n)) == log(1 + log n)
    return std::sqrt((delta_term + 1.5 * std::log1p(std::log(nd))) / nd);
}

double phi(std::uint64_t n, double delta) {
    if (n == 0)
        throw std::domain_error("phi: n must be >= 1");
    return phi_from_term(n, phi_delta_term(delta));
}

double lcb(const ArmStats& stats, double delta, std::uint64_t num_alternatives) {
    if (num_alternatives == 0)
        throw std::domain_error("lcb: K must be >= 1");
    const double m = stats.mean();
    return m - phi(stats.pulls, delta / (2.0 * static_cast<double>(num_alternatives)));
}

double ucb(const ArmStats& stats, double delta) {
    const double m = stats.mean();
    return m + phi(stats.pulls, delta / 2.0);
}

} // namespace mabfdr
