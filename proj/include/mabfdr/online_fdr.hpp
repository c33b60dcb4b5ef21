#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mabfdr {

enum class FdrKind { Lord, Lord15, Bonferroni, Independent };

std::string_view to_string(FdrKind kind);
/// Accepts "lord", "lord15", "bonferroni", "independent"/"ind". Throws ConfigError.
FdrKind parse_fdr_kind(std::string_view text);

/// Default spending sequence gamma_j = 0.07 log(max(j,2)) / (j exp(sqrt(log j))), j >= 1.
/// Not renormalized; its partial sums stay below 1.
double lord_gamma(std::uint64_t j);

/// Level below which alpha_j is raised before it is handed to a bandit.
inline constexpr double kAlphaFloor = 1e-12;

/// Test-level state machine for one stream of hypotheses.
///
/// Lord:        alpha_j = gamma_{j - tau} W(tau), W <- W - alpha_j + R_j (alpha - W0)
/// Lord15:      alpha_j = alpha gamma_{j - tau}, W reset to alpha on every rejection
/// Bonferroni:  alpha_j = 6 alpha / (pi^2 j^2)
/// Independent: alpha_j = alpha
///
/// tau is the index of the most recent rejection (0 if none) and W(tau) the
/// wealth right after processing it (W0 when tau = 0).
class FdrState {
public:
    /// `initial_wealth` defaults to alpha / 2. Throws ConfigError unless
    /// 0 < alpha < 1 and, for the LORD variants, 0 < initial_wealth < alpha.
    FdrState(FdrKind kind, double alpha, std::optional<double> initial_wealth = std::nullopt);

    /// Level for hypothesis next_index(); always in (0, 1).
    double next_alpha() const;

    /// Records R_j for hypothesis next_index() and advances to j + 1. Throws
    /// std::logic_error if the wealth would become negative.
    void record(bool rejected);

    FdrKind kind() const noexcept { return kind_; }
    double alpha() const noexcept { return alpha_; }
    double initial_wealth() const noexcept { return w0_; }
    double wealth() const noexcept { return wealth_; }
    double wealth_at_last_rejection() const noexcept { return wealth_at_tau_; }
    std::uint64_t last_rejection() const noexcept { return tau_; }
    std::uint64_t next_index() const noexcept { return j_; }
    const std::vector<bool>& history() const noexcept { return history_; }

private:
    FdrKind kind_;
    double alpha_;
    double w0_;
    double wealth_;
    double wealth_at_tau_;
    std::uint64_t tau_ = 0;
    std::uint64_t j_ = 1;
    std::vector<bool> history_;
};

} // namespace mabfdr
