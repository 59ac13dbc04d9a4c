#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "mabi/harness.hpp"

namespace mabi {

namespace {

struct Check {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerated = 0.0;
};

class Suite {
public:
    explicit Suite(std::ostream& out) : out_(out) {}

    void record(const std::string& name, bool pass, double measured, double tolerated) {
        out_ << (pass ? "[ ok ] " : "[FAIL] ") << name << "  measured=" << measured
             << " tolerated=" << tolerated << "\n";
        fails_ += pass ? 0 : 1;
    }

    // Convention: `measured` must not exceed `tolerated`.
    void check_le(const std::string& name, double measured, double tolerated) {
        record(name, measured <= tolerated, measured, tolerated);
    }
    void check_ge(const std::string& name, double measured, double floor_value) {
        record(name, measured >= floor_value, measured, floor_value);
    }

    int fails() const { return fails_; }

private:
    std::ostream& out_;
    int fails_ = 0;
};

double binom_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

// ---------------------------------------------------------------- geometry

void suite_geometry(Suite& s, std::uint64_t seed) {
    Rng rng = make_stream(seed, "validate-geometry");

    double worst = 0.0;
    for (int i = 0; i < 3000; ++i) {
        const Point a{rng.uniform(-50, 50), rng.uniform(-50, 50)};
        const Point b{rng.uniform(-50, 50), rng.uniform(-50, 50)};
        const Point c{rng.uniform(-50, 50), rng.uniform(-50, 50)};
        worst = std::max(worst,
                         sup_distance(a, c) - (sup_distance(a, b) + sup_distance(b, c)));
    }
    s.check_le("geometry.triangle-inequality excess", worst, 1e-12);

    const UnitUniverse uni = UnitUniverse::lattice(225);
    int bad = 0;
    for (int i = 0; i < 300; ++i) {
        const int u = static_cast<int>(rng.next_below(225));
        const double r1 = rng.uniform(0.0, 6.0);
        const double r2 = r1 + rng.uniform(0.0, 4.0);
        const auto small = uni.ball(u, r1);
        const auto big = uni.ball(u, r2);
        for (int v : small)
            if (std::find(big.begin(), big.end(), v) == big.end())
                ++bad;
    }
    s.check_le("geometry.ball-monotonicity violations", bad, 0);

    int invariant_bad = 0;
    for (int n : {1, 4, 9, 100, 225}) {
        const UnitUniverse g = UnitUniverse::lattice(n);
        for (int u = 0; u < g.size(); ++u) {
            const Point& p = g.unit(u);
            if (std::fabs(p.x) > g.half_width() || std::fabs(p.y) > g.half_width())
                ++invariant_bad;
            for (int v = u + 1; v < g.size(); ++v)
                if (sup_distance(p, g.unit(v)) < 1.0)
                    ++invariant_bad;
        }
        if (g.half_width() > 2.0 * std::sqrt(static_cast<double>(n)))
            ++invariant_bad;
    }
    s.check_le("geometry.lattice-invariant violations", invariant_bad, 0);

    int oracle_bad = 0;
    for (int i = 0; i < 200; ++i) {
        const int u = static_cast<int>(rng.next_below(225));
        const double r = rng.uniform(0.0, 8.0);
        const auto fast = uni.ball(u, r);
        std::vector<int> slow;
        for (int v = 0; v < uni.size(); ++v)
            if (sup_distance(uni.unit(u), uni.unit(v)) < r)
                slow.push_back(v);
        if (fast != slow)
            ++oracle_bad;
    }
    s.check_le("geometry.ball-vs-bruteforce mismatches", oracle_bad, 0);
}

// ---------------------------------------------------------------- partition

// Closed-interval membership per the tile formulas, with precedence
// quad > strip > interior; independent of the classifier's axis logic.
std::vector<RegionId> oracle_memberships(double lx, double ly, const PartitionSpec& spec) {
    const int m = spec.cells_per_axis();
    const double l = spec.cell_side, r = spec.margin;
    std::vector<RegionId> out;
    auto in = [](double x, double lo, double hi) { return x >= lo && x <= hi; };
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j)
            if (in(lx, i * l - r, i * l + r) && in(ly, j * l - r, j * l + r))
                out.push_back({RegionId::Kind::Quad, i, j});
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j < m; ++j)
            if (in(lx, i * l - r, i * l + r) && in(ly, j * l + r, (j + 1) * l - r))
                out.push_back({RegionId::Kind::VStrip, i, j});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= m; ++j)
            if (in(lx, i * l + r, (i + 1) * l - r) && in(ly, j * l - r, j * l + r))
                out.push_back({RegionId::Kind::HStrip, i, j});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (in(lx, i * l + r, (i + 1) * l - r) && in(ly, j * l + r, (j + 1) * l - r))
                out.push_back({RegionId::Kind::Interior, i, j});
    return out;
}

int region_rank(RegionId::Kind k) {
    switch (k) {
    case RegionId::Kind::Quad: return 2;
    case RegionId::Kind::VStrip:
    case RegionId::Kind::HStrip: return 1;
    case RegionId::Kind::Interior: return 0;
    }
    return -1;
}

void suite_partition(Suite& s, std::uint64_t seed) {
    Rng rng = make_stream(seed, "validate-partition");

    int tiling_bad = 0;
    for (const auto& [l, r, b] : std::vector<std::array<double, 3>>{
             {5.0, 1.2, 10.0}, {3.0, 0.5, 7.0}, {4.0, 0.0, 9.5}, {2.5, 1.0, 4.0}}) {
        const PartitionSpec spec(l, r, b);
        const int grid = 41;
        for (int gx = 0; gx <= grid; ++gx) {
            for (int gy = 0; gy <= grid; ++gy) {
                const double lx = 2.0 * b * gx / grid;
                const double ly = 2.0 * b * gy / grid;
                const RegionId got = classify_region({lx - b, ly - b}, spec);
                const auto members = oracle_memberships(lx, ly, spec);
                if (members.empty()) {
                    ++tiling_bad;
                    continue;
                }
                int best = 0;
                bool found = false;
                for (const RegionId& reg : members) {
                    best = std::max(best, region_rank(reg.kind));
                    found = found || reg == got;
                }
                if (!found || region_rank(got.kind) != best)
                    ++tiling_bad;
            }
        }
    }
    s.check_le("partition.tiling-oracle mismatches", tiling_bad, 0);

    // Empirical strip / quad attachment frequencies.
    {
        const PartitionSpec spec(5.0, 1.2, 10.0);
        const RegionId strip{RegionId::Kind::VStrip, 1, 1};
        const RegionId quad{RegionId::Kind::Quad, 1, 1};
        const int n = 10000;
        int strip_left = 0, quad_first = 0;
        const auto strip_opts = region_cluster_options(strip, spec);
        const auto quad_opts = region_cluster_options(quad, spec);
        for (int i = 0; i < n; ++i) {
            const Partition part = Partition::sample(spec, rng);
            strip_left += part.cluster_of_region(strip) == strip_opts[0];
            quad_first += part.cluster_of_region(quad) == quad_opts[0];
        }
        s.check_le("partition.strip-frequency |freq-1/2|",
                   std::fabs(strip_left / double(n) - 0.5), 3.0 * binom_se(0.5, n));
        s.check_le("partition.quad-frequency |freq-1/4|",
                   std::fabs(quad_first / double(n) - 0.25), 3.0 * binom_se(0.25, n));
    }

    // Containment floor over admissible geometries with cell_side >= 4r.
    {
        const UnitUniverse uni = UnitUniverse::lattice(400);
        double lowest = 1.0;
        int excess_clusters = 0;
        for (int i = 0; i < 60; ++i) {
            const double l = rng.uniform(4.0, 9.0);
            const double r = rng.uniform(0.2, l / 4.0);
            const PartitionSpec spec(l, r, uni.half_width());
            const int u = static_cast<int>(rng.next_below(400));
            lowest = std::min(lowest, containment_probability(spec, uni, u, r));
            const Partition part = Partition::sample(spec, rng);
            if (ball_cluster_set(part, uni, u, r).size() > 4)
                ++excess_clusters;
        }
        s.check_ge("partition.containment-floor min probability", lowest, 1.0 / 16.0 - 1e-12);
        s.check_le("partition.ball-cluster-set size>4 count", excess_clusters, 0);
    }

    // Analytic containment vs Monte Carlo.
    {
        const UnitUniverse uni = UnitUniverse::lattice(400);
        const PartitionSpec spec(5.0, 1.2, uni.half_width());
        int bad = 0;
        for (int u : {126, 210, 337}) {
            const double exact = containment_probability(spec, uni, u, 1.2);
            const int n = 20000;
            int hits = 0;
            for (int i = 0; i < n; ++i) {
                const Partition part = Partition::sample(spec, rng);
                const auto set = ball_cluster_set(part, uni, u, 1.2);
                hits += set.size() == 1 && set[0] == part.cluster_of(uni.unit(u));
            }
            const double gap = std::fabs(hits / double(n) - exact);
            if (gap > 4.0 * binom_se(std::max(exact, 1e-3), n))
                ++bad;
        }
        s.check_le("partition.containment-vs-mc violations", bad, 0);
    }
}

// -------------------------------------------------------------- environment

void suite_environment(Suite& s, std::uint64_t seed) {
    Rng rng = make_stream(seed, "validate-environment");
    const auto uni = std::make_shared<const UnitUniverse>(UnitUniverse::lattice(100));
    Rng env_rng = make_stream(seed, "validate-env-build");
    const LatticeNeighborModel lattice(uni, 2, 40, 2, env_rng);
    const LowerBoundModel lower(4, 40, InterferenceKernel::sutva(), env_rng);
    const UniformConstantModel constant(uni, 40, {0.3, 0.7});
    const std::vector<const RewardModel*> models{&lattice, &lower, &constant};

    int range_bad = 0;
    for (const RewardModel* model : models) {
        for (int i = 0; i < 20000; ++i) {
            AssignmentVector z(static_cast<std::size_t>(model->units()));
            for (auto& a : z)
                a = static_cast<std::uint8_t>(rng.next_below(model->arms()));
            const int u = static_cast<int>(rng.next_below(model->units()));
            const int t = 1 + static_cast<int>(rng.next_below(model->horizon()));
            const double y = model->eval(u, t, z);
            if (!(y >= 0.0 && y <= 1.0))
                ++range_bad;
        }
    }
    s.check_le("environment.reward-range violations", range_bad, 0);

    long long dip_bad = 0;
    for (const RewardModel* model : models)
        dip_bad += verify_dip(*model, 2000, rng).violations;
    s.check_le("environment.dip violations", dip_bad, 0);

    // Exhaustive window-extension check at m=1.
    {
        const auto kernel = InterferenceKernel::tabulated({1.0, 0.5, 0.0});
        int bad = 0;
        std::vector<double> f(512);
        for (int bits = 0; bits < 512; ++bits) {
            std::vector<std::uint8_t> window(9);
            for (int c = 0; c < 9; ++c)
                window[static_cast<std::size_t>(c)] = (bits >> c) & 1;
            f[static_cast<std::size_t>(bits)] =
                kernel(0) - kernel(r_star(window, 1));
        }
        for (int za = 0; za < 512; ++za) {
            for (int zb = 0; zb < 512; ++zb) {
                // Agreement on B(O,1) = the center cell (bit 4).
                if (((za >> 4) & 1) == ((zb >> 4) & 1) &&
                    std::fabs(f[za] - f[zb]) > kernel(1) + 1e-12)
                    ++bad;
                if (za == zb && std::fabs(f[za] - f[zb]) > kernel(2) + 1e-12)
                    ++bad;
            }
        }
        s.check_le("environment.extension-dip violations (m=1)", bad, 0);
    }

    // Monotone under 0 -> 1 flips.
    {
        const auto kernel = InterferenceKernel::power_law(1.0);
        int bad = 0;
        for (int i = 0; i < 2000; ++i) {
            const int m = 2;
            const int side = 2 * m + 1;
            std::vector<std::uint8_t> window(static_cast<std::size_t>(side) * side);
            for (auto& w : window)
                w = static_cast<std::uint8_t>(rng.next_below(2));
            const double before = kernel(0) - kernel(r_star(window, m));
            const std::size_t flip = rng.next_below(window.size());
            if (window[flip] == 1)
                continue;
            window[flip] = 1;
            const double after = kernel(0) - kernel(r_star(window, m));
            if (after < before - 1e-12)
                ++bad;
        }
        s.check_le("environment.extension-monotone violations", bad, 0);
    }

    // Antithetic coin pairs average to 1/2 on interior units.
    {
        const int horizon = 16;
        std::vector<std::uint8_t> xi(horizon);
        for (auto& x : xi)
            x = rng.bernoulli(0.5);
        std::vector<std::uint8_t> flipped(horizon);
        for (int t = 0; t < horizon; ++t)
            flipped[static_cast<std::size_t>(t)] = 1 - xi[static_cast<std::size_t>(t)];
        const LowerBoundModel a(4, horizon, InterferenceKernel::sutva(), xi);
        const LowerBoundModel b(4, horizon, InterferenceKernel::sutva(), flipped);
        AssignmentVector z(static_cast<std::size_t>(a.units()));
        for (auto& arm : z)
            arm = static_cast<std::uint8_t>(rng.next_below(2));
        double worst = 0.0;
        for (int t = 1; t <= horizon; ++t) {
            for (int u = 0; u < a.units(); ++u) {
                if (!a.is_interior(u))
                    continue;
                const double mean = (a.eval(u, t, z) + b.eval(u, t, z)) / 2.0;
                worst = std::max(worst, std::fabs(mean - 0.5));
            }
        }
        s.check_le("environment.antithetic-mean |mean-1/2|", worst, 1e-15);
    }
}

// ---------------------------------------------------------------- estimator

void suite_estimator(Suite& s, std::uint64_t seed) {
    Rng rng = make_stream(seed, "validate-estimator");
    const auto uni = std::make_shared<const UnitUniverse>(UnitUniverse::lattice(400));

    // P/16 <= Q <= P over admissible geometries with cell_side >= 4r.
    {
        double lo_excess = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double l = rng.uniform(4.0, 9.0);
            const double r = rng.uniform(0.2, l / 4.0);
            const PartitionSpec spec(l, r, uni->half_width());
            const int u = static_cast<int>(rng.next_below(400));
            const double p = rng.uniform(0.05, 0.95);
            const ArmDistribution dist({p, 1.0 - p});
            const double q = exposure_prob_analytic(spec, *uni, u, 0, r, dist);
            lo_excess = std::max(lo_excess, std::max(p / 16.0 - q, q - p));
        }
        s.check_le("estimator.sandwich-bound excess", lo_excess, 1e-12);
    }

    // Analytic vs Monte Carlo exposure probability.
    {
        double worst = 0.0, worst_tol = 1.0;
        for (int i = 0; i < 5; ++i) {
            const double l = rng.uniform(3.5, 7.0);
            const double r = rng.uniform(0.3, 0.49 * l);
            const PartitionSpec spec(l, r, uni->half_width());
            const int u = static_cast<int>(rng.next_below(400));
            const double p = std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9}[i];
            const ArmDistribution dist({p, 1.0 - p});
            const double exact = exposure_prob_analytic(spec, *uni, u, 0, r, dist);
            const int n = 20000;
            const double mc = exposure_prob_mc(spec, *uni, u, 0, r, dist, n, rng);
            const double gap = std::fabs(exact - mc);
            const double tol = 4.0 * binom_se(std::max(1e-3, exact), n);
            if (gap - tol > worst - worst_tol) {
                worst = gap;
                worst_tol = tol;
            }
        }
        s.check_le("estimator.analytic-vs-mc |gap|", worst, worst_tol);
    }

    // IX truncation and pointwise monotonicity in beta.
    {
        ExposureReport report(4, 2);
        report.set(0, 0, 1, 0.25);
        report.set(1, 0, 1, 0.5);
        report.set(2, 1, 1, 0.75);
        report.set(3, 0, 1, 0.05);
        const std::vector<double> y{1.0, 1.0, 1.0, 1.0};
        const double beta_hi = ht_ix_estimate(y, report, 0, 0.3);
        const double beta_lo = ht_ix_estimate(y, report, 0, 0.1);
        const double beta_zero = ht_ix_estimate(y, report, 0, 0.0);
        s.check_le("estimator.ix-monotone-in-beta violations",
                   (beta_hi <= beta_lo && beta_lo <= beta_zero) ? 0 : 1, 0);
        s.check_le("estimator.ix-truncation max term*beta", beta_hi * 0.3, 4.0 / 4 + 1e-12);
    }

    // Near-unbiasedness under no interference at r = kappa = 1, beta = 0.
    {
        const auto small = std::make_shared<const UnitUniverse>(UnitUniverse::lattice(100));
        Rng env_rng = make_stream(seed, "validate-estimator-env");
        const LatticeNeighborModel env(small, 2, 8, 1, env_rng);
        const PartitionSpec spec(3.0, 1.0, small->half_width());
        const ClusterContext ctx(spec, small, 1.0);
        const ArmDistribution dist({0.3, 0.7});
        const int t = 3, n = 2000;
        const int cells = ctx.cells_per_axis();
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const Partition part = Partition::sample(spec, rng);
            std::vector<std::uint8_t> cluster_arm(static_cast<std::size_t>(cells) * cells);
            for (auto& a : cluster_arm)
                a = static_cast<std::uint8_t>(rng.categorical(dist.probs));
            AssignmentVector z(static_cast<std::size_t>(env.units()));
            for (int u = 0; u < env.units(); ++u) {
                const ClusterId c = part.cluster_of_region(ctx.unit_region(u));
                z[static_cast<std::size_t>(u)] =
                    cluster_arm[static_cast<std::size_t>(c.i) * cells + c.j];
            }
            double est = 0.0;
            for (int u = 0; u < env.units(); ++u) {
                if (z[static_cast<std::size_t>(u)] != 0)
                    continue;
                est += env.eval(u, t, z) / ctx.profiles().q(u, dist[0]);
            }
            est /= env.units();
            sum += est;
            sumsq += est * est;
        }
        const double mean = sum / n;
        const double sd = std::sqrt(std::max(0.0, sumsq / n - mean * mean) / n);
        s.check_le("estimator.ht-unbiased |mc-mean - truth|",
                   std::fabs(mean - env.counterfactual_mean(t, 0)), 4.0 * sd);
    }
}

// ------------------------------------------------------------------- policy

void suite_policy(Suite& s, std::uint64_t seed) {
    Rng rng = make_stream(seed, "validate-policy");

    // Distribution validity across random updates.
    {
        Exp3State state(5, 0.1, 0.05);
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            std::vector<double> est(5);
            for (auto& e : est)
                e = rng.uniform(0.0, 20.0);
            state.update(est);
            const ArmDistribution dist = state.probs();
            double sum = 0.0;
            for (int a = 0; a < 5; ++a)
                sum += dist[a];
            worst = std::max(worst, std::fabs(sum - 1.0));
        }
        s.check_le("policy.distribution-sum |sum-1|", worst, 1e-12);
    }

    // Exact shift invariance on a shared dyadic grid.
    {
        int bad = 0;
        for (int i = 0; i < 200; ++i) {
            Exp3State a(3, 0.2, 0.0), b(3, 0.2, 0.0);
            const double shift = static_cast<double>(rng.next_below(1 << 20)) / (1 << 10);
            for (int round = 0; round < 5; ++round) {
                std::vector<double> ea(3), eb(3);
                for (int arm = 0; arm < 3; ++arm) {
                    ea[static_cast<std::size_t>(arm)] =
                        static_cast<double>(rng.next_below(1 << 20)) / (1 << 20);
                    eb[static_cast<std::size_t>(arm)] = ea[static_cast<std::size_t>(arm)] + shift;
                }
                a.update(ea);
                b.update(eb);
            }
            const ArmDistribution pa = a.probs(), pb = b.probs();
            for (int arm = 0; arm < 3; ++arm)
                if (pa[arm] != pb[arm])
                    ++bad;
        }
        s.check_le("policy.shift-invariance mismatches", bad, 0);
    }

    // Switchback equals plain EXP3-IX on the induced reward table.
    {
        int bad = 0;
        for (int rep = 0; rep < 3; ++rep) {
            const auto uni = std::make_shared<const UnitUniverse>(UnitUniverse::lattice(49));
            Rng env_rng = make_stream(seed, "validate-policy-env", rep);
            const LatticeNeighborModel env(uni, 2, 30, 2, env_rng);
            std::vector<double> table(static_cast<std::size_t>(30) * 2);
            for (int t = 1; t <= 30; ++t)
                for (int a = 0; a < 2; ++a)
                    table[static_cast<std::size_t>(t - 1) * 2 + a] = env.counterfactual_mean(t, a);
            Rng arms1 = make_stream(seed, "validate-policy-arms", rep);
            Rng arms2 = make_stream(seed, "validate-policy-arms", rep);
            Exp3State state(2, 0.15, 0.05);
            RunRecord sb;
            sb.horizon = 30;
            sb.arms = 2;
            sb.counterfactual = table;
            for (int t = 1; t <= 30; ++t) {
                const StepOutcome so = switchback_step(state, env, t, arms1);
                sb.realized.push_back(so.realized_mean);
                sb.arm_log.push_back(so.arm);
                sb.arm_fraction.insert(sb.arm_fraction.end(), so.arm_fraction.begin(),
                                       so.arm_fraction.end());
            }
            const RunRecord plain = run_exp3ix_on_table(table, 30, 2, 0.15, 0.05, arms2);
            if (sb.arm_log != plain.arm_log)
                ++bad;
            if (regret(sb).max_regret != regret(plain).max_regret)
                ++bad;
        }
        s.check_le("policy.reduction-fidelity mismatches", bad, 0);
    }

    // Bit-identical trajectories under identical seeds, and estimate
    // truncation at 1/beta.
    {
        const auto uni = std::make_shared<const UnitUniverse>(UnitUniverse::lattice(100));
        Rng env_rng = make_stream(seed, "validate-policy-env2");
        const LatticeNeighborModel env(uni, 2, 20, 2, env_rng);
        const PartitionSpec spec(3.1622776601683795, 1.25, uni->half_width());
        const ClusterContext ctx(spec, uni, 1.25);
        const double beta = 0.1;
        double max_estimate = 0.0;
        std::vector<std::vector<double>> trajectories;
        for (int run = 0; run < 2; ++run) {
            Exp3State state(2, 0.18, beta);
            Rng arms = make_stream(seed, "validate-policy-arms2");
            Rng parts = make_stream(seed, "validate-policy-parts2");
            std::vector<double> traj;
            for (int t = 1; t <= 20; ++t) {
                const StepOutcome so = exp3_ht_ix_step(state, env, ctx, t, parts, arms);
                traj.push_back(so.realized_mean);
                traj.push_back(state.probs()[0]);
                for (double e : so.estimates)
                    max_estimate = std::max(max_estimate, e);
            }
            trajectories.push_back(std::move(traj));
        }
        s.check_le("policy.determinism trajectory mismatches",
                   trajectories[0] == trajectories[1] ? 0 : 1, 0);
        s.check_le("policy.estimate-truncation max estimate", max_estimate, 1.0 / beta + 1e-9);
    }
}

// -------------------------------------------------------------- lower-bound

void suite_lower_bound(Suite& s, std::uint64_t seed) {
    Rng rng = make_stream(seed, "validate-lower-bound");
    const int horizon = 100;
    const int sequences = 10000;
    const double threshold = horizon / 2.0 + std::sqrt(static_cast<double>(horizon)) / 4.0;

    // Best fixed arm exceeds T/2 + sqrt(T)/4 with the anti-concentration
    // frequency. Arm totals in coin units: arm 0 is T/2, arm 1 is the coin sum.
    int exceeded = 0;
    for (int i = 0; i < sequences; ++i) {
        int ones = 0;
        for (int t = 0; t < horizon; ++t)
            ones += rng.bernoulli(0.5);
        const double best = std::max(horizon / 2.0, static_cast<double>(ones));
        exceeded += best >= threshold;
    }
    const double freq = static_cast<double>(exceeded) / sequences;
    s.check_ge("lower-bound.anti-concentration frequency", freq,
               1.0 / 15.0 - 3.0 * binom_se(1.0 / 15.0, sequences));

    // The same event evaluated through the instance's counterfactual means.
    {
        int exceeded_env = 0;
        const int env_sequences = 200;
        const int env_horizon = 64;
        const double env_threshold =
            env_horizon / 2.0 + std::sqrt(static_cast<double>(env_horizon)) / 4.0;
        for (int i = 0; i < env_sequences; ++i) {
            Rng env_rng = make_stream(seed, "validate-lb-env", i);
            const LowerBoundModel env(1, env_horizon, InterferenceKernel::sutva(), env_rng);
            const double factor = static_cast<double>(env.units()) / env.interior_count();
            double best = 0.0;
            for (int a = 0; a < 2; ++a) {
                double total = 0.0;
                for (int t = 1; t <= env_horizon; ++t)
                    total += env.counterfactual_mean(t, a) * factor;
                best = std::max(best, total);
            }
            exceeded_env += best >= env_threshold;
        }
        s.check_ge("lower-bound.anti-concentration via instances",
                   static_cast<double>(exceeded_env) / env_sequences,
                   1.0 / 15.0 - 3.0 * binom_se(1.0 / 15.0, env_sequences));
    }

    // Boundary values of the construction.
    {
        Rng env_rng = make_stream(seed, "validate-lb-env-b");
        const LowerBoundModel env(4, 8, InterferenceKernel::sutva(), env_rng);
        double worst = 0.0;
        const AssignmentVector ones = constant_assignment(env.units(), 1);
        const AssignmentVector zeros = constant_assignment(env.units(), 0);
        for (int t = 1; t <= 8; ++t) {
            for (int u = 0; u < env.units(); ++u) {
                if (!env.is_interior(u))
                    continue;
                const double want1 = env.xi()[static_cast<std::size_t>(t - 1)] ? 1.0 : 0.0;
                worst = std::max(worst, std::fabs(env.eval(u, t, ones) - want1));
                worst = std::max(worst, std::fabs(env.eval(u, t, zeros) - 0.5));
            }
        }
        s.check_le("lower-bound.boundary-values |error|", worst, 0.0);
    }
}

} // namespace

int run_validation_suite(const std::string& suite, std::uint64_t seed, std::ostream& report) {
    Suite s(report);
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "geometry") {
        suite_geometry(s, seed);
        known = true;
    }
    if (all || suite == "partition") {
        suite_partition(s, seed);
        known = true;
    }
    if (all || suite == "environment") {
        suite_environment(s, seed);
        known = true;
    }
    if (all || suite == "estimator") {
        suite_estimator(s, seed);
        known = true;
    }
    if (all || suite == "policy") {
        suite_policy(s, seed);
        known = true;
    }
    if (all || suite == "lower-bound") {
        suite_lower_bound(s, seed);
        known = true;
    }
    if (!known)
        throw ConfigError("validate: unknown suite '" + suite + "'");
    report << (s.fails() == 0 ? "validation passed" : "validation FAILED") << " (" << s.fails()
           << " failing checks)\n";
    return s.fails();
}

} // namespace mabi
