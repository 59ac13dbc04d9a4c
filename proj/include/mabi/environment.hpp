#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mabi/geometry.hpp"
#include "mabi/rng.hpp"

namespace mabi {

// Arm id per unit id.
using AssignmentVector = std::vector<std::uint8_t>;

AssignmentVector constant_assignment(int units, int arm);

// Non-increasing interference decay psi(r) >= 0.
class InterferenceKernel {
public:
    enum class Variant : std::uint8_t { Sutva, KappaNeighborhood, PowerLaw, Tabulated };

    // psi(r) = 1(r = 0): a unit's reward depends on its own arm only.
    static InterferenceKernel sutva();
    // psi(x) = 1(kappa > x): interference limited to distance < kappa.
    static InterferenceKernel kappa_neighborhood(double kappa);
    // psi(r) = min(1, r^-c), c >= 1.
    static InterferenceKernel power_law(double exponent);
    // Step function over integer radii: psi(r) = values[floor(r)], clamped to
    // the last entry. values must be non-increasing and nonnegative.
    static InterferenceKernel tabulated(std::vector<double> values);

    double operator()(double r) const;
    Variant variant() const { return variant_; }
    double param() const { return param_; }
    const std::vector<double>& table() const { return table_; }

    // "sutva", "kappa:2", "power-law:1.5", "tabulated:1;0.5;0"
    std::string describe() const;
    static InterferenceKernel parse(const std::string& text);

private:
    InterferenceKernel(Variant variant, double param, std::vector<double> table);

    Variant variant_;
    double param_;
    std::vector<double> table_;
};

// Reward functions Y_ut : [k]^U -> [0,1]. All randomness (drifts, coin
// sequences) is drawn at construction, so evaluation is pure and instances
// can be shared read-only across replication workers. Counterfactual means
// over constant assignments are tabulated once at construction.
class RewardModel {
public:
    virtual ~RewardModel() = default;

    // Reward of unit u in round t (1-based, t in [1..horizon]) under z.
    double eval(int u, int t, const AssignmentVector& z) const;

    // (1/N) sum_u Y_ut(a * ones).
    double counterfactual_mean(int t, int arm) const;

    int units() const { return universe_->size(); }
    int arms() const { return arms_; }
    int horizon() const { return horizon_; }
    const UnitUniverse& universe() const { return *universe_; }
    const std::shared_ptr<const UnitUniverse>& universe_ptr() const { return universe_; }
    const InterferenceKernel& kernel() const { return kernel_; }

    // Units carrying structurally nonzero rewards (all of them except for the
    // padded exterior of the adversarial instance).
    virtual int interior_count() const { return units(); }

    virtual std::string describe() const = 0;

protected:
    RewardModel(std::shared_ptr<const UnitUniverse> universe, InterferenceKernel kernel,
                int arms, int horizon);
    virtual double eval_impl(int u, int t, const AssignmentVector& z) const = 0;
    // Builds the counterfactual table; derived constructors call this last.
    void finalize();

private:
    std::shared_ptr<const UnitUniverse> universe_;
    InterferenceKernel kernel_;
    int arms_;
    int horizon_;
    std::vector<double> counterfactual_; // horizon x arms
};

// Two-arm lattice model with neighborhood interference and per-unit drifts:
//   Y_ut(z) = (1 + (2*rho_ut - 1) * c_ut) / 2
// where rho_ut is the share of u's neighborhood assigned arm 1 and c_ut the
// value of u's piecewise-constant drift profile in round t. The neighborhood
// is the unit plus its axial lattice neighbors (radius 2), or the unit alone
// (radius 1, no interference).
class LatticeNeighborModel : public RewardModel {
public:
    static constexpr int kDriftPieces = 8;

    LatticeNeighborModel(std::shared_ptr<const UnitUniverse> universe, int arms, int horizon,
                         int neighborhood_radius, Rng& rng);

    double drift(int u, int t) const;
    int neighborhood_radius() const { return radius_; }

    // Drift pieces are ceil(horizon/8) rounds long, the last one clipped.
    static int piece_index(int t, int horizon);

    std::string describe() const override;

protected:
    double eval_impl(int u, int t, const AssignmentVector& z) const override;

private:
    int radius_;
    std::vector<double> drift_;         // units x kDriftPieces
    std::vector<std::int32_t> neigh_;   // units x 5, -1 padded
    std::vector<std::int8_t> neigh_len_;
};

// Constant per-arm reward levels under SUTVA: Y_ut(z) = levels[z_u].
class UniformConstantModel : public RewardModel {
public:
    UniformConstantModel(std::shared_ptr<const UnitUniverse> universe, int horizon,
                         std::vector<double> levels);
    std::string describe() const override;

protected:
    double eval_impl(int u, int t, const AssignmentVector& z) const override;

private:
    std::vector<double> levels_;
};

// Largest radius in [0..m] whose open ball around the window center contains
// only ones. `window` is row-major over a (2m+1) x (2m+1) grid of 0/1 values.
int r_star(std::span<const std::uint8_t> window, int m);

// Extension of the decay profile to the assignment hypercube around one unit:
// f(z) = psi(0) - psi(r_star of the window restriction of z).
struct HypercubeExtension {
    std::shared_ptr<const UnitUniverse> universe;
    int center_unit = 0;
    int half_width = 0; // m
    InterferenceKernel kernel = InterferenceKernel::sutva();
};

// Window cells without a universe unit never constrain the radius. Requires a
// two-arm assignment; other arm values in the window are rejected.
double extension_value(const HypercubeExtension& ext, const AssignmentVector& z);

// Adversarial two-arm instance on a (4s+1) x (4s+1) lattice (s = sqrt(scale)):
// the centered (2s+1)-side interior carries Y_ut(z) = 1/2 + (xi_t - 1/2) f_u(z)
// with f_u the hypercube extension of the rescaled kernel over the (2s+1)^2
// window around u and xi an i.i.d. fair coin sequence drawn at construction;
// the exterior ring is identically 0. Kernel must have psi(0) = 1; its tail is
// rescaled so psi(s) = 0.
class LowerBoundModel : public RewardModel {
public:
    // `universe` may share a pre-built (4s+1)-side lattice across instances;
    // when null, the model constructs its own.
    LowerBoundModel(int scale, int horizon, const InterferenceKernel& kernel, Rng& rng,
                    std::shared_ptr<const UnitUniverse> universe = nullptr);
    // Test hook: explicit coin sequence (values in {0,1}, length = horizon).
    LowerBoundModel(int scale, int horizon, const InterferenceKernel& kernel,
                    std::vector<std::uint8_t> xi);

    int interior_count() const override;
    bool is_interior(int u) const;
    int window_half_width() const { return side_scale_; }
    std::span<const std::uint8_t> xi() const { return xi_; }
    // Rescaled decay profile at integer radii 0..m.
    std::span<const double> decay_profile() const { return psi_; }

    std::string describe() const override;

protected:
    double eval_impl(int u, int t, const AssignmentVector& z) const override;

private:
    void init(const InterferenceKernel& kernel);

    int side_scale_;              // s, also the window half-width m
    std::vector<std::uint8_t> xi_;
    std::vector<double> psi_;     // rescaled, psi_[0] = 1, psi_[m] = 0
};

// Samples random (u, t, r, z, z') pairs agreeing on B(u, r) and counts
// violations of |Y(z) - Y(z')| <= psi(r).
struct DipReport {
    long long samples = 0;
    long long violations = 0;
    double max_excess = 0.0;
};
DipReport verify_dip(const RewardModel& model, int samples, Rng& rng);

} // namespace mabi
