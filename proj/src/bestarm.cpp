#include "mabfdr/bestarm.hpp"

#include "mabfdr/errors.hpp"
#include "mabfdr/pvalue.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mabfdr {

void BanditConfig::validate(std::size_t num_arms) const {
    if (num_arms < 2)
        throw ConfigError("a bandit needs a control and at least one alternative");
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("bandit delta must lie in (0,1)");
    if (!(epsilon >= 0.0))
        throw ConfigError("bandit epsilon must be >= 0");
    if (truncation < num_arms)
        throw ConfigError("truncation " + std::to_string(truncation) + " is below the " +
                          std::to_string(num_arms) + " pulls of the initial round");
}

namespace {

std::size_t argmax(std::span<const double> values, std::size_t skip = SIZE_MAX) {
    std::size_t best = SIZE_MAX;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i == skip)
            continue;
        if (best == SIZE_MAX || values[i] > values[best])
            best = i;
    }
    return best;
}

struct Leaders {
    std::size_t leader = 0;     // empirical best over all arms
    std::size_t challenger = 0; // highest UCB other than the leader
};

Leaders find_leaders(std::span<const double> means, std::span<const double> ucbs) {
    Leaders l;
    l.leader = argmax(means);
    l.challenger = argmax(ucbs, l.leader);
    return l;
}

// Bounds for all arms with the delta-dependent parts hoisted; only arms whose
// pull count changed are recomputed.
class BoundTable {
public:
    BoundTable(std::size_t num_arms, double delta)
        : means_(num_arms), lcbs_(num_arms), ucbs_(num_arms), seen_(num_arms, 0),
          lcb_term_(phi_delta_term(delta / (2.0 * static_cast<double>(num_arms - 1)))),
          ucb_term_(phi_delta_term(delta / 2.0)) {}

    void refresh(std::span<const ArmStats> stats) {
        for (std::size_t i = 0; i < stats.size(); ++i) {
            if (stats[i].pulls == seen_[i])
                continue;
            seen_[i] = stats[i].pulls;
            means_[i] = stats[i].mean();
            lcbs_[i] = means_[i] - phi_from_term(stats[i].pulls, lcb_term_);
            ucbs_[i] = means_[i] + phi_from_term(stats[i].pulls, ucb_term_);
        }
    }

    std::span<const double> means() const { return means_; }
    std::span<const double> lcbs() const { return lcbs_; }
    std::span<const double> ucbs() const { return ucbs_; }

private:
    std::vector<double> means_, lcbs_, ucbs_;
    std::vector<std::uint64_t> seen_;
    double lcb_term_;
    double ucb_term_;
};

void validate_inputs(std::span<const ArmModel> models, const BanditConfig& config,
                     std::span<SeededStream> streams) {
    config.validate(models.size());
    if (streams.size() != models.size())
        throw std::invalid_argument("one reward stream per arm is required");
    for (const ArmModel& m : models)
        m.validate();
}

class Experiment {
public:
    Experiment(std::span<const ArmModel> models, const BanditConfig& config, std::span<SeededStream> streams,
               const PValueObserver& observer)
        : models_(models), config_(config), streams_(streams), observer_(observer), stats_(models.size()),
          pvalue_(models.size() - 1, config.epsilon), bounds_(models.size(), config.delta) {}

    bool budget_left() const { return total_ < config_.truncation; }

    void pull(std::size_t arm) {
        stats_[arm].add(draw(models_[arm], streams_[arm]));
        ++total_;
    }

    void update_pvalue() {
        pvalue_.tighten(std::span<const ArmStats>(stats_).subspan(1), stats_[0]);
        if (observer_)
            observer_(total_, pvalue_.current);
    }

    Termination check() {
        bounds_.refresh(stats_);
        return check_termination_bounds(bounds_.means(), bounds_.lcbs(), bounds_.ucbs(), config_.epsilon);
    }

    const BoundTable& bounds() const { return bounds_; }

    BanditOutcome finish(const Termination& t) const {
        BanditOutcome out;
        out.stop_time = total_;
        out.final_pvalue = pvalue_.current;
        out.pulls_per_arm.reserve(stats_.size());
        for (const ArmStats& s : stats_)
            out.pulls_per_arm.push_back(s.pulls);
        switch (t.kind) {
        case StopKind::ReturnControl:
            out.returned_arm = 0;
            break;
        case StopKind::ReturnArm:
            out.returned_arm = t.arm;
            break;
        case StopKind::Continue:
            out.truncated = true;
            out.returned_arm = argmax(bounds_.means());
            break;
        }
        return out;
    }

private:
    std::span<const ArmModel> models_;
    const BanditConfig& config_;
    std::span<SeededStream> streams_;
    const PValueObserver& observer_;
    std::vector<ArmStats> stats_;
    PValueState pvalue_;
    BoundTable bounds_;
    std::uint64_t total_ = 0;
};

} // namespace

Termination check_termination_bounds(std::span<const double> means, std::span<const double> lcbs,
                                     std::span<const double> ucbs, double epsilon) {
    const std::size_t n = means.size();
    if (n < 2 || lcbs.size() != n || ucbs.size() != n)
        throw std::invalid_argument("termination check needs matching bounds for >= 2 arms");

    bool control_wins = true;
    for (std::size_t i = 1; i < n && control_wins; ++i)
        control_wins = lcbs[0] > ucbs[i] - epsilon;
    if (control_wins)
        return {StopKind::ReturnControl, 0};

    const Leaders l = find_leaders(means, ucbs);
    const std::size_t h = l.leader;
    if (lcbs[h] > ucbs[l.challenger] - epsilon && lcbs[h] > ucbs[0] + epsilon)
        return {StopKind::ReturnArm, h};
    return {StopKind::Continue, 0};
}

Termination check_termination(std::span<const ArmStats> all_stats, double delta, double epsilon) {
    const std::size_t n = all_stats.size();
    if (n < 2)
        throw std::invalid_argument("termination check needs a control and an alternative");
    std::vector<double> means(n), lcbs(n), ucbs(n);
    const auto k = static_cast<std::uint64_t>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        means[i] = all_stats[i].mean();
        lcbs[i] = lcb(all_stats[i], delta, k);
        ucbs[i] = ucb(all_stats[i], delta);
    }
    return check_termination_bounds(means, lcbs, ucbs, epsilon);
}

BanditOutcome run_lucb(std::span<const ArmModel> models, const BanditConfig& config,
                       std::span<SeededStream> streams, const PValueObserver& observer) {
    validate_inputs(models, config, streams);
    Experiment ex(models, config, streams, observer);
    for (std::size_t arm = 0; arm < models.size(); ++arm)
        ex.pull(arm);
    ex.update_pvalue();

    std::vector<std::size_t> batch;
    batch.reserve(4);
    for (;;) {
        const Termination t = ex.check();
        if (t.kind != StopKind::Continue || !ex.budget_left())
            return ex.finish(t);

        const auto& b = ex.bounds();
        const Leaders l = find_leaders(b.means(), b.ucbs());
        batch.clear();
        if (config.epsilon > 0.0) {
            const std::size_t top_alt = argmax(b.ucbs(), 0);
            batch = {0, top_alt, l.leader, l.challenger};
        } else {
            batch = {l.leader, l.challenger};
        }
        std::sort(batch.begin(), batch.end());
        batch.erase(std::unique(batch.begin(), batch.end()), batch.end());
        for (std::size_t arm : batch) {
            if (!ex.budget_left())
                break;
            ex.pull(arm);
        }
        ex.update_pvalue();
    }
}

BanditOutcome run_uniform(std::span<const ArmModel> models, const BanditConfig& config,
                          std::span<SeededStream> streams, const PValueObserver& observer) {
    validate_inputs(models, config, streams);
    Experiment ex(models, config, streams, observer);
    for (;;) {
        for (std::size_t arm = 0; arm < models.size() && ex.budget_left(); ++arm)
            ex.pull(arm);
        ex.update_pvalue();
        const Termination t = ex.check();
        if (t.kind != StopKind::Continue || !ex.budget_left())
            return ex.finish(t);
    }
}

std::vector<SeededStream> reward_streams(std::uint64_t seed, std::uint64_t run, std::uint64_t hypothesis,
                                         std::size_t num_arms) {
    std::vector<SeededStream> streams;
    streams.reserve(num_arms);
    for (std::size_t arm = 0; arm < num_arms; ++arm)
        streams.emplace_back(seed, run, hypothesis, arm, StreamPurpose::Rewards);
    return streams;
}

} // namespace mabfdr
