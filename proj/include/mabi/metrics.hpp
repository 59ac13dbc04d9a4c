#pragma once

#include <cstdint>
#include <vector>

namespace mabi {

// One episode's trajectory: realized per-round mean rewards, per-round
// counterfactual means for every fixed arm, and the assignment log.
// Round index is 0-based here.
struct RunRecord {
    int horizon = 0;
    int arms = 0;
    std::vector<double> realized;        // horizon
    std::vector<double> counterfactual;  // horizon x arms, row-major
    std::vector<int> arm_log;            // chosen arm; -1 for mixed assignments
    std::vector<double> arm_fraction;    // horizon x arms, share of units per arm
    std::uint64_t seed = 0;

    double cf(int t, int a) const {
        return counterfactual[static_cast<std::size_t>(t) * arms + a];
    }
    bool complete() const;
};

struct RegretSummary {
    std::vector<double> per_arm; // R_a - R; may be negative for losing arms
    double max_regret = 0.0;     // max over arms
    int best_arm = 0;            // argmax of the fixed-arm totals
};

// Regret against every fixed arm from the stored counterfactuals.
RegretSummary regret(const RunRecord& record);

// Empirical quantile with linear interpolation between order statistics
// (type-7). q in (0, 1]; the q -> 1 limit is the maximum.
double quantile(std::vector<double> values, double q);

struct InstanceStats {
    double mean = 0.0;
    double upper_quantile = 0.0;
};

struct AggregateResult {
    std::vector<InstanceStats> per_instance;
    double mean_of_means = 0.0;
    double mean_of_quantiles = 0.0;
};

// Per-instance statistics first, then averaged across instances - exactly in
// that order. `q` is the upper quantile level (0.95 for the headline tables).
AggregateResult aggregate(const std::vector<std::vector<double>>& regrets_per_instance,
                          double q = 0.95);

} // namespace mabi
