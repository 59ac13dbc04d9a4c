#include "mabi/policy.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace mabi {

Exp3State::Exp3State(int arms, double learning_rate, double ix_offset)
    : log_w_(static_cast<std::size_t>(arms), 0.0), eta_(learning_rate), beta_(ix_offset) {
    if (arms < 1)
        throw std::invalid_argument("Exp3State: needs at least one arm");
    if (!(eta_ > 0.0 && eta_ < 1.0))
        throw std::invalid_argument("Exp3State: learning rate must lie in (0, 1)");
    if (!(beta_ >= 0.0 && beta_ < 0.5))
        throw std::invalid_argument("Exp3State: IX offset must lie in [0, 1/2)");
}

Exp3State Exp3State::from_weights(const std::vector<double>& weights, double learning_rate,
                                  double ix_offset) {
    Exp3State state(static_cast<int>(weights.size()), learning_rate, ix_offset);
    for (std::size_t a = 0; a < weights.size(); ++a) {
        if (!(weights[a] > 0.0))
            throw std::invalid_argument("Exp3State: weights must be strictly positive");
        state.log_w_[a] = std::log(weights[a]);
    }
    return state;
}

ArmDistribution Exp3State::probs() const {
    const double top = *std::max_element(log_w_.begin(), log_w_.end());
    std::vector<double> p(log_w_.size());
    double sum = 0.0;
    for (std::size_t a = 0; a < log_w_.size(); ++a) {
        p[a] = std::exp(log_w_[a] - top);
        sum += p[a];
    }
    for (double& v : p)
        v /= sum;
    return ArmDistribution(std::move(p));
}

void Exp3State::update(std::span<const double> estimates) {
    if (static_cast<int>(estimates.size()) != arms())
        throw std::invalid_argument("Exp3State::update: estimate length mismatch");
    double top = estimates[0];
    for (double e : estimates) {
        if (!std::isfinite(e))
            throw std::invalid_argument("Exp3State::update: non-finite estimate");
        top = std::max(top, e);
    }
    for (std::size_t a = 0; a < log_w_.size(); ++a)
        log_w_[a] += eta_ * (estimates[a] - top);
    const double shift = *std::max_element(log_w_.begin(), log_w_.end());
    for (double& w : log_w_)
        w -= shift;
    ++round_;
}

ClusterContext::ClusterContext(PartitionSpec spec, std::shared_ptr<const UnitUniverse> universe,
                               double exposure_radius, bool simplified, QMode q_mode)
    : spec_(spec), universe_(std::move(universe)), radius_(exposure_radius),
      simplified_(simplified), q_mode_(q_mode), cells_(spec.cells_per_axis()),
      profiles_(spec_, *universe_, exposure_radius,
                simplified ? ExposureProfileTable::Mode::Uniform : ExposureProfileTable::Mode::Rrp) {
    if (!(2.0 * radius_ < spec_.cell_side))
        throw std::invalid_argument("ClusterContext: requires 2 * exposure_radius < cell_side");
    const int n = universe_->size();
    regions_.reserve(static_cast<std::size_t>(n));
    uniform_flat_.reserve(static_cast<std::size_t>(n));
    ball_offset_.reserve(static_cast<std::size_t>(n) + 1);
    ball_offset_.push_back(0);
    for (int u = 0; u < n; ++u) {
        const Point& p = universe_->unit(u);
        regions_.push_back(classify_region(p, spec_));
        const ClusterId c = uniform_cluster_of(p, spec_);
        uniform_flat_.push_back(c.i * cells_ + c.j);
        for (int v : universe_->ball(u, radius_))
            ball_ids_.push_back(v);
        ball_offset_.push_back(ball_ids_.size());
    }
}

std::span<const std::int32_t> ClusterContext::ball(int u) const {
    const std::size_t lo = ball_offset_[static_cast<std::size_t>(u)];
    const std::size_t hi = ball_offset_[static_cast<std::size_t>(u) + 1];
    return {ball_ids_.data() + lo, hi - lo};
}

StepOutcome switchback_step(Exp3State& state, const RewardModel& env, int t, Rng& arm_rng) {
    if (t < 1 || t > env.horizon())
        throw std::out_of_range("switchback_step: round out of range");
    const ArmDistribution dist = state.probs();
    const int k = state.arms();
    const int arm = arm_rng.categorical(dist.probs);

    StepOutcome out;
    out.arm = arm;
    out.realized_mean = env.counterfactual_mean(t, arm); // all units share the arm
    out.estimates.assign(static_cast<std::size_t>(k), 0.0);
    out.estimates[static_cast<std::size_t>(arm)] =
        out.realized_mean / (dist[arm] + state.ix_offset());
    out.arm_fraction.assign(static_cast<std::size_t>(k), 0.0);
    out.arm_fraction[static_cast<std::size_t>(arm)] = 1.0;
    state.update(out.estimates);
    return out;
}

StepOutcome exp3_ht_ix_step(Exp3State& state, const RewardModel& env, const ClusterContext& ctx,
                            int t, Rng& partition_rng, Rng& arm_rng, const Partition* frozen) {
    if (t < 1 || t > env.horizon())
        throw std::out_of_range("exp3_ht_ix_step: round out of range");
    if (&env.universe() != &ctx.universe())
        throw std::invalid_argument("exp3_ht_ix_step: context universe mismatch");
    const ArmDistribution dist = state.probs();
    const int k = state.arms();
    const int n = env.units();
    const int cells = ctx.cells_per_axis();
    const double beta = state.ix_offset();

    // Fresh partition, then one arm per cluster in cluster-id order.
    std::optional<Partition> part;
    const Partition* active = frozen;
    if (!ctx.simplified() && active == nullptr) {
        part = Partition::sample(ctx.spec(), partition_rng);
        active = &*part;
    }
    std::vector<std::uint8_t> cluster_arm(static_cast<std::size_t>(cells) * cells);
    for (auto& a : cluster_arm)
        a = static_cast<std::uint8_t>(arm_rng.categorical(dist.probs));

    std::vector<int> unit_cluster(static_cast<std::size_t>(n));
    AssignmentVector z(static_cast<std::size_t>(n));
    StepOutcome out;
    out.arm_fraction.assign(static_cast<std::size_t>(k), 0.0);
    for (int u = 0; u < n; ++u) {
        int flat;
        if (ctx.simplified()) {
            flat = ctx.uniform_cluster_flat(u);
        } else {
            const ClusterId c = active->cluster_of_region(ctx.unit_region(u));
            flat = c.i * cells + c.j;
        }
        unit_cluster[static_cast<std::size_t>(u)] = flat;
        z[static_cast<std::size_t>(u)] = cluster_arm[static_cast<std::size_t>(flat)];
        out.arm_fraction[z[static_cast<std::size_t>(u)]] += 1.0;
    }
    for (double& f : out.arm_fraction)
        f /= n;

    std::vector<double> rewards(static_cast<std::size_t>(n));
    double realized = 0.0;
    for (int u = 0; u < n; ++u) {
        rewards[static_cast<std::size_t>(u)] = env.eval(u, t, z);
        realized += rewards[static_cast<std::size_t>(u)];
    }
    out.realized_mean = realized / n;

    // HT-IX estimates. A unit is exposed to at most one arm (the common arm of
    // its ball) unless the ball is empty, in which case it is exposed to all.
    out.estimates.assign(static_cast<std::size_t>(k), 0.0);
    std::vector<int> seen;
    for (int u = 0; u < n; ++u) {
        const auto ball = ctx.ball(u);
        int arm = -1;
        if (ball.empty()) {
            arm = -2;
        } else {
            arm = z[static_cast<std::size_t>(ball[0])];
            for (std::size_t i = 1; i < ball.size(); ++i) {
                if (z[static_cast<std::size_t>(ball[i])] != arm) {
                    arm = -1;
                    break;
                }
            }
        }
        if (arm == -1)
            continue;
        const double y = rewards[static_cast<std::size_t>(u)];
        if (arm == -2) {
            for (int a = 0; a < k; ++a)
                out.estimates[static_cast<std::size_t>(a)] += y / (1.0 + beta);
            continue;
        }
        double q;
        if (ctx.q_mode() == QMode::Marginal) {
            q = ctx.profiles().q(u, dist[arm]);
        } else {
            seen.clear();
            for (std::int32_t v : ball) {
                const int c = unit_cluster[static_cast<std::size_t>(v)];
                if (std::find(seen.begin(), seen.end(), c) == seen.end())
                    seen.push_back(c);
            }
            q = std::pow(dist[arm], static_cast<double>(seen.size()));
        }
        out.estimates[static_cast<std::size_t>(arm)] += y / (q + beta);
    }
    for (double& e : out.estimates)
        e /= n;

    state.update(out.estimates);
    return out;
}

RunRecord run_exp3ix_on_table(const std::vector<double>& table, int horizon, int arms, double eta,
                              double beta, Rng& arm_rng) {
    if (static_cast<int>(table.size()) != horizon * arms)
        throw std::invalid_argument("run_exp3ix_on_table: table size mismatch");
    Exp3State state(arms, eta, beta);
    RunRecord rec;
    rec.horizon = horizon;
    rec.arms = arms;
    rec.realized.reserve(static_cast<std::size_t>(horizon));
    rec.counterfactual = table;
    rec.arm_log.reserve(static_cast<std::size_t>(horizon));
    rec.arm_fraction.assign(static_cast<std::size_t>(horizon) * arms, 0.0);
    std::vector<double> estimates(static_cast<std::size_t>(arms));
    for (int t = 0; t < horizon; ++t) {
        const ArmDistribution dist = state.probs();
        const int arm = arm_rng.categorical(dist.probs);
        const double y = table[static_cast<std::size_t>(t) * arms + arm];
        std::fill(estimates.begin(), estimates.end(), 0.0);
        estimates[static_cast<std::size_t>(arm)] = y / (dist[arm] + beta);
        state.update(estimates);
        rec.realized.push_back(y);
        rec.arm_log.push_back(arm);
        rec.arm_fraction[static_cast<std::size_t>(t) * arms + arm] = 1.0;
    }
    return rec;
}

DefaultParameters default_parameters(const InterferenceKernel& kernel, int arms, int horizon,
                                     double units, double cell_side_override, double delta) {
    if (arms < 1 || horizon < 1 || !(units >= 1.0))
        throw std::invalid_argument("default_parameters: counts must be positive");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("default_parameters: delta must lie in (0, 1)");

    DefaultParameters out;
    const double t = static_cast<double>(horizon);
    switch (kernel.variant()) {
    case InterferenceKernel::Variant::Sutva:
        out.cell_side = 0.5;
        out.exposure_radius = 0.1;
        break;
    case InterferenceKernel::Variant::KappaNeighborhood:
        out.exposure_radius = kernel.param();
        out.cell_side = kernel.param() * std::sqrt(t);
        break;
    case InterferenceKernel::Variant::PowerLaw: {
        const double c = kernel.param();
        const double m = std::min(std::pow(units / t, (2.0 + c) / (3.0 + c)),
                                  std::pow(units, 2.0 * c / (2.0 * c + 1.0)) *
                                      std::pow(t, -(2.0 * c - 1.0) / (2.0 * c + 1.0)));
        out.cell_side = std::sqrt(units / m);
        out.exposure_radius = out.cell_side / std::sqrt(t);
        break;
    }
    case InterferenceKernel::Variant::Tabulated: {
        const auto& tab = kernel.table();
        double support = -1.0;
        for (std::size_t i = 0; i < tab.size(); ++i) {
            if (tab[i] == 0.0) {
                support = static_cast<double>(i);
                break;
            }
        }
        if (support <= 0.0)
            throw std::invalid_argument(
                "default_parameters: tabulated kernel without compact support");
        out.exposure_radius = support;
        out.cell_side = support * std::sqrt(t);
        break;
    }
    }
    if (cell_side_override > 0.0)
        out.cell_side = cell_side_override;
    if (!(2.0 * out.exposure_radius < out.cell_side))
        throw std::invalid_argument(
            "default_parameters: prescribed radius is infeasible (needs 2r < cell side; "
            "increase the horizon or the cell side)");

    out.eta = std::sqrt(std::log(std::max(2.0, static_cast<double>(arms))) /
                        (static_cast<double>(arms) * t));
    out.eta = std::clamp(out.eta, 1e-9, 1.0 - 1e-9);
    out.beta = std::sqrt(out.cell_side * out.cell_side /
                         (static_cast<double>(arms) * units * t) * std::log(1.0 / delta));
    out.beta = std::clamp(out.beta, 1e-9, 0.499);
    return out;
}

} // namespace mabi
