#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mabi/environment.hpp"
#include "mabi/geometry.hpp"
#include "mabi/partition.hpp"
#include "mabi/rng.hpp"

namespace mabi {

// Normalized probability vector over arms.
struct ArmDistribution {
    std::vector<double> probs;

    explicit ArmDistribution(std::vector<double> p);
    int arms() const { return static_cast<int>(probs.size()); }
    double operator[](int a) const { return probs[static_cast<std::size_t>(a)]; }
};

// 1 iff every unit of B(u, r) is assigned arm a; vacuously 1 for empty balls.
int exposure(const UnitUniverse& universe, const AssignmentVector& z, int u, int arm, double r);

// Exact exposure probability, marginal over both the partition draw and the
// independent per-cluster arm draws: sum_j w_j * p_a^j with w the ball cover
// profile. Requires 2r < cell_side.
double exposure_prob_analytic(const PartitionSpec& spec, const UnitUniverse& universe, int u,
                              int arm, double r, const ArmDistribution& dist);

// Monte Carlo oracle for the analytic value: a fresh partition and fresh
// cluster arms per sample.
double exposure_prob_mc(const PartitionSpec& spec, const UnitUniverse& universe, int u, int arm,
                        double r, const ArmDistribution& dist, long long n_samples, Rng& rng);

// Per-unit, per-arm exposure indicators X and probabilities Q for one round.
struct ExposureReport {
    int units = 0;
    int arms = 0;
    std::vector<std::uint8_t> indicator;
    std::vector<double> probability;

    ExposureReport(int units_in, int arms_in);
    std::uint8_t x(int u, int a) const { return indicator[idx(u, a)]; }
    double q(int u, int a) const { return probability[idx(u, a)]; }
    void set(int u, int a, std::uint8_t x_in, double q_in);

    // Rows: unit,arm,x,q
    void dump_csv(std::ostream& out) const;

private:
    std::size_t idx(int u, int a) const {
        return static_cast<std::size_t>(u) * arms + static_cast<std::size_t>(a);
    }
};

// Horvitz-Thompson estimator with implicit-exploration offset:
//   (1/N) sum_u X_ua / (Q_ua + beta) * y_u.
// beta must lie in [0, 1/2); a positive indicator with Q + beta = 0 is an error.
double ht_ix_estimate(std::span<const double> rewards, const ExposureReport& report, int arm,
                      double beta);

// Per-unit cover profiles for a fixed (universe, spec, r), precomputed once
// and reused across rounds: exposure probabilities depend on the arm
// distribution only through q(u, p) = sum_j w_j p^j.
class ExposureProfileTable {
public:
    enum class Mode { Rrp, Uniform };

    ExposureProfileTable(const PartitionSpec& spec, const UnitUniverse& universe, double r,
                         Mode mode = Mode::Rrp);

    double q(int u, double p_arm) const;
    std::span<const double> profile(int u) const;
    double radius() const { return radius_; }

private:
    double radius_;
    std::vector<std::size_t> offset_;
    std::vector<double> weights_;
};

} // namespace mabi
