#include "mabi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mabi {

bool RunRecord::complete() const {
    const auto t = static_cast<std::size_t>(horizon);
    const auto k = static_cast<std::size_t>(arms);
    return horizon > 0 && arms > 0 && realized.size() == t && counterfactual.size() == t * k &&
           arm_log.size() == t && arm_fraction.size() == t * k;
}

RegretSummary regret(const RunRecord& record) {
    if (!record.complete())
        throw std::invalid_argument("regret: incomplete run record");
    double total = 0.0;
    for (double v : record.realized)
        total += v;

    RegretSummary out;
    out.per_arm.resize(static_cast<std::size_t>(record.arms));
    double best = -1.0;
    for (int a = 0; a < record.arms; ++a) {
        double fixed = 0.0;
        for (int t = 0; t < record.horizon; ++t)
            fixed += record.cf(t, a);
        out.per_arm[static_cast<std::size_t>(a)] = fixed - total;
        if (fixed > best) {
            best = fixed;
            out.best_arm = a;
        }
    }
    out.max_regret = *std::max_element(out.per_arm.begin(), out.per_arm.end());
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty())
        throw std::invalid_argument("quantile: empty sample");
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("quantile: level must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size())
        return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

AggregateResult aggregate(const std::vector<std::vector<double>>& regrets_per_instance,
                          double q) {
    if (regrets_per_instance.empty())
        throw std::invalid_argument("aggregate: no instances");
    AggregateResult out;
    out.per_instance.reserve(regrets_per_instance.size());
    for (const auto& batch : regrets_per_instance) {
        if (batch.empty())
            throw std::invalid_argument("aggregate: empty instance batch");
        double mean = 0.0;
        for (double v : batch)
            mean += v;
        mean /= static_cast<double>(batch.size());
        out.per_instance.push_back({mean, quantile(batch, q)});
    }
    for (const InstanceStats& s : out.per_instance) {
        out.mean_of_means += s.mean;
        out.mean_of_quantiles += s.upper_quantile;
    }
    out.mean_of_means /= static_cast<double>(out.per_instance.size());
    out.mean_of_quantiles /= static_cast<double>(out.per_instance.size());
    return out;
}

} // namespace mabi
