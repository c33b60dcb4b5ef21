#include "mabfdr/online_fdr.hpp"

#include "mabfdr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mabfdr {

std::string_view to_string(FdrKind kind) {
    switch (kind) {
    case FdrKind::Lord:
        return "lord";
    case FdrKind::Lord15:
        return "lord15";
    case FdrKind::Bonferroni:
        return "bonferroni";
    case FdrKind::Independent:
        return "independent";
    }
    return "?";
}

FdrKind parse_fdr_kind(std::string_view text) {
    if (text == "lord")
        return FdrKind::Lord;
    if (text == "lord15" || text == "lord'15")
        return FdrKind::Lord15;
    if (text == "bonferroni" || text == "bonf")
        return FdrKind::Bonferroni;
    if (text == "independent" || text == "ind")
        return FdrKind::Independent;
    throw ConfigError("unknown FDR procedure '" + std::string(text) + "'");
}

double lord_gamma(std::uint64_t j) {
    if (j == 0)
        throw std::domain_error("gamma index starts at 1");
    const double jd = static_cast<double>(j);
    return 0.07 * std::log(std::max(jd, 2.0)) / (jd * std::exp(std::sqrt(std::log(jd))));
}

FdrState::FdrState(FdrKind kind, double alpha, std::optional<double> initial_wealth)
    : kind_(kind), alpha_(alpha), w0_(initial_wealth.value_or(alpha / 2.0)) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("FDR level alpha must lie in (0,1)");
    if ((kind == FdrKind::Lord || kind == FdrKind::Lord15) && !(w0_ > 0.0 && w0_ < alpha))
        throw ConfigError("initial wealth must lie in (0, alpha)");
    // LORD'15 spends alpha * gamma from the start, so its opening wealth is alpha.
    wealth_ = kind == FdrKind::Lord15 ? alpha : w0_;
    wealth_at_tau_ = wealth_;
}

double FdrState::next_alpha() const {
    double level = 0.0;
    switch (kind_) {
    case FdrKind::Lord:
        level = lord_gamma(j_ - tau_) * wealth_at_tau_;
        break;
    case FdrKind::Lord15:
        level = alpha_ * lord_gamma(j_ - tau_);
        break;
    case FdrKind::Bonferroni: {
        const double jd = static_cast<double>(j_);
        level = 6.0 * alpha_ / (std::numbers::pi * std::numbers::pi * jd * jd);
        break;
    }
    case FdrKind::Independent:
        level = alpha_;
        break;
    }
    return std::min(level, std::nextafter(1.0, 0.0));
}

void FdrState::record(bool rejected) {
    const double level = next_alpha();
    switch (kind_) {
    case FdrKind::Lord:
        wealth_ = wealth_ - level + (rejected ? alpha_ - w0_ : 0.0);
        break;
    case FdrKind::Lord15:
        wealth_ = rejected ? alpha_ : wealth_ - level;
        break;
    case FdrKind::Bonferroni:
    case FdrKind::Independent:
        break;
    }
    if (wealth_ < 0.0)
        throw std::logic_error("alpha-wealth became negative at hypothesis " + std::to_string(j_));
    if (rejected) {
        tau_ = j_;
        wealth_at_tau_ = wealth_;
    }
    history_.push_back(rejected);
    ++j_;
}

} // namespace mabfdr
