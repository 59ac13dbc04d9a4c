#include "mabi/estimator.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mabi {

ArmDistribution::ArmDistribution(std::vector<double> p) : probs(std::move(p)) {
    if (probs.empty())
        throw std::invalid_argument("ArmDistribution: empty");
    double sum = 0.0;
    for (double v : probs) {
        if (!(v >= 0.0))
            throw std::invalid_argument("ArmDistribution: negative probability");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("ArmDistribution: probabilities must sum to 1");
}

int exposure(const UnitUniverse& universe, const AssignmentVector& z, int u, int arm, double r) {
    if (static_cast<int>(z.size()) != universe.size())
        throw std::invalid_argument("exposure: assignment length mismatch");
    for (int v : universe.ball(u, r))
        if (z[static_cast<std::size_t>(v)] != arm)
            return 0;
    return 1;
}

double exposure_prob_analytic(const PartitionSpec& spec, const UnitUniverse& universe, int u,
                              int arm, double r, const ArmDistribution& dist) {
    if (arm < 0 || arm >= dist.arms())
        throw std::out_of_range("exposure_prob_analytic: invalid arm");
    const std::vector<double> w = ball_cover_profile(spec, universe, u, r);
    const double p = dist[arm];
    double q = 0.0;
    double pj = 1.0;
    for (double wj : w) {
        q += wj * pj;
        pj *= p;
    }
    return q;
}

double exposure_prob_mc(const PartitionSpec& spec, const UnitUniverse& universe, int u, int arm,
                        double r, const ArmDistribution& dist, long long n_samples, Rng& rng) {
    if (n_samples < 1)
        throw std::invalid_argument("exposure_prob_mc: needs at least one sample");
    if (!(2.0 * r < spec.cell_side))
        throw std::invalid_argument("exposure_prob_mc: requires 2r < cell_side");
    const std::vector<int> ids = universe.ball(u, r);
    const int m = spec.cells_per_axis();
    std::vector<std::uint8_t> cluster_arm(static_cast<std::size_t>(m) * m);
    long long hits = 0;
    for (long long s = 0; s < n_samples; ++s) {
        const Partition part = Partition::sample(spec, rng);
        for (auto& a : cluster_arm)
            a = static_cast<std::uint8_t>(rng.categorical(dist.probs));
        bool all = true;
        for (int v : ids) {
            const ClusterId c = part.cluster_of(universe.unit(v));
            if (cluster_arm[static_cast<std::size_t>(c.i) * m + c.j] != arm) {
                all = false;
                break;
            }
        }
        hits += all;
    }
    return static_cast<double>(hits) / static_cast<double>(n_samples);
}

ExposureReport::ExposureReport(int units_in, int arms_in)
    : units(units_in), arms(arms_in),
      indicator(static_cast<std::size_t>(units_in) * arms_in, 0),
      probability(static_cast<std::size_t>(units_in) * arms_in, 0.0) {
    if (units_in < 1 || arms_in < 1)
        throw std::invalid_argument("ExposureReport: empty dimensions");
}

void ExposureReport::set(int u, int a, std::uint8_t x_in, double q_in) {
    indicator[idx(u, a)] = x_in;
    probability[idx(u, a)] = q_in;
}

void ExposureReport::dump_csv(std::ostream& out) const {
    out << "unit,arm,x,q\n";
    char buf[64];
    for (int u = 0; u < units; ++u)
        for (int a = 0; a < arms; ++a) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.12g\n", u, a, int(x(u, a)), q(u, a));
            out << buf;
        }
}

double ht_ix_estimate(std::span<const double> rewards, const ExposureReport& report, int arm,
                      double beta) {
    if (!(beta >= 0.0 && beta < 0.5))
        throw std::invalid_argument("ht_ix_estimate: beta must lie in [0, 1/2)");
    if (arm < 0 || arm >= report.arms)
        throw std::out_of_range("ht_ix_estimate: invalid arm");
    if (static_cast<int>(rewards.size()) != report.units)
        throw std::invalid_argument("ht_ix_estimate: reward length mismatch");
    double sum = 0.0;
    for (int u = 0; u < report.units; ++u) {
        if (!report.x(u, arm))
            continue;
        const double denom = report.q(u, arm) + beta;
        if (denom <= 0.0)
            throw std::runtime_error("ht_ix_estimate: exposed unit with zero propensity");
        sum += rewards[static_cast<std::size_t>(u)] / denom;
    }
    return sum / report.units;
}

ExposureProfileTable::ExposureProfileTable(const PartitionSpec& spec, const UnitUniverse& universe,
                                           double r, Mode mode)
    : radius_(r) {
    const int n = universe.size();
    offset_.reserve(static_cast<std::size_t>(n) + 1);
    offset_.push_back(0);
    for (int u = 0; u < n; ++u) {
        const std::vector<double> w = mode == Mode::Rrp
                                          ? ball_cover_profile(spec, universe, u, r)
                                          : ball_cover_profile_uniform(spec, universe, u, r);
        weights_.insert(weights_.end(), w.begin(), w.end());
        offset_.push_back(weights_.size());
    }
}

std::span<const double> ExposureProfileTable::profile(int u) const {
    const std::size_t lo = offset_[static_cast<std::size_t>(u)];
    const std::size_t hi = offset_[static_cast<std::size_t>(u) + 1];
    return {weights_.data() + lo, hi - lo};
}

double ExposureProfileTable::q(int u, double p_arm) const {
    double q = 0.0;
    double pj = 1.0;
    for (double wj : profile(u)) {
        q += wj * pj;
        pj *= p_arm;
    }
    return q;
}

} // namespace mabi
