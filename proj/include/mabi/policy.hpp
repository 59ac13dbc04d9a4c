#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mabi/environment.hpp"
#include "mabi/estimator.hpp"
#include "mabi/metrics.hpp"
#include "mabi/partition.hpp"
#include "mabi/rng.hpp"

namespace mabi {

// Exponential-weights state over arms. Weights are kept in log space and
// re-centered every round; estimate vectors are re-centered by their maximum
// before accumulation, which keeps long horizons overflow-free and makes the
// derived distribution invariant to common shifts of the estimates.
class Exp3State {
public:
    Exp3State(int arms, double learning_rate, double ix_offset);
    static Exp3State from_weights(const std::vector<double>& weights, double learning_rate,
                                  double ix_offset);

    ArmDistribution probs() const;

    // Multiplicative update W_a *= exp(eta * estimate_a).
    void update(std::span<const double> estimates);

    int arms() const { return static_cast<int>(log_w_.size()); }
    double learning_rate() const { return eta_; }
    double ix_offset() const { return beta_; }
    int round() const { return round_; }

private:
    std::vector<double> log_w_;
    double eta_;
    double beta_;
    int round_ = 0;
};

// How the exposure propensity Q is computed inside the clustered policy:
// marginal over partition and arm randomness (default, a deterministic
// function of the spec), or conditional on the realized partition (ablation).
enum class QMode : std::uint8_t { Marginal, Conditional };

// Static per-(universe, spec, radius) data shared by every round and
// replication of a clustered run: unit regions, exposure balls, and the
// marginal cover profiles. Read-only after construction.
class ClusterContext {
public:
    ClusterContext(PartitionSpec spec, std::shared_ptr<const UnitUniverse> universe,
                   double exposure_radius, bool simplified = false,
                   QMode q_mode = QMode::Marginal);

    const PartitionSpec& spec() const { return spec_; }
    const UnitUniverse& universe() const { return *universe_; }
    double exposure_radius() const { return radius_; }
    bool simplified() const { return simplified_; }
    QMode q_mode() const { return q_mode_; }
    int cells_per_axis() const { return cells_; }
    int cluster_count() const { return cells_ * cells_; }

    std::span<const std::int32_t> ball(int u) const;
    const RegionId& unit_region(int u) const { return regions_[static_cast<std::size_t>(u)]; }
    int uniform_cluster_flat(int u) const { return uniform_flat_[static_cast<std::size_t>(u)]; }
    const ExposureProfileTable& profiles() const { return profiles_; }

private:
    PartitionSpec spec_;
    std::shared_ptr<const UnitUniverse> universe_;
    double radius_;
    bool simplified_;
    QMode q_mode_;
    int cells_;
    std::vector<RegionId> regions_;
    std::vector<int> uniform_flat_;
    std::vector<std::size_t> ball_offset_;
    std::vector<std::int32_t> ball_ids_;
    ExposureProfileTable profiles_;
};

struct StepOutcome {
    int arm = -1;                     // the broadcast arm; -1 for mixed rounds
    double realized_mean = 0.0;       // (1/N) sum_u Y_ut(Z_t)
    std::vector<double> estimates;    // per-arm reward estimates fed to the update
    std::vector<double> arm_fraction; // share of units assigned each arm
};

// One switchback round: draw a single arm from the current distribution,
// assign it to every unit, update with the one-hot IX estimate. Consumes
// exactly one uniform from arm_rng.
StepOutcome switchback_step(Exp3State& state, const RewardModel& env, int t, Rng& arm_rng);

// One clustered round: sample a fresh partition, draw one arm per cluster
// (cluster-id order), broadcast within clusters, observe unit rewards, and
// update every arm with its Horvitz-Thompson-IX estimate. Passing `frozen`
// reuses that realized partition instead of sampling (ablation mode; the
// fresh-per-round draw is the default behavior).
StepOutcome exp3_ht_ix_step(Exp3State& state, const RewardModel& env, const ClusterContext& ctx,
                            int t, Rng& partition_rng, Rng& arm_rng,
                            const Partition* frozen = nullptr);

// Plain adversarial-bandit EXP3-IX over an explicit horizon x arms reward
// table; the induced-table twin of a switchback run.
RunRecord run_exp3ix_on_table(const std::vector<double>& table, int horizon, int arms, double eta,
                              double beta, Rng& arm_rng);

// Recommended parameters per kernel family.
//   sutva:     cell_side 1/2, radius 0.1 (singleton clustering on unit-spaced sets)
//   kappa:     radius kappa, cell_side kappa * sqrt(T)
//   power-law: m = min{(N/T)^((2+c)/(3+c)), N^(2c/(2c+1)) T^(-(2c-1)/(2c+1))}
//              clusters, cell_side sqrt(N/m), radius cell_side / sqrt(T)
//   tabulated: treated as kappa with the table's compact-support radius
// eta = sqrt(log k / (kT)); beta = sqrt(cell_side^2 / (kNT) * log(1/delta)).
// eta and beta are clamped into their admissible open ranges; an infeasible
// geometry (2 * radius >= cell_side) is an error.
struct DefaultParameters {
    double eta = 0.0;
    double beta = 0.0;
    double cell_side = 0.0;
    double exposure_radius = 0.0;
};
DefaultParameters default_parameters(const InterferenceKernel& kernel, int arms, int horizon,
                                     double units, double cell_side_override = 0.0,
                                     double delta = 0.05);

} // namespace mabi
