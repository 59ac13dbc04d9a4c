#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mabi/harness.hpp"

namespace {

// Exit codes: 0 success, 1 validation failure, 2 configuration error.
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;

struct SimulateArgs {
    std::string config_path;
    std::string policy;
    int horizon = -1;
    long long units = -1;
    std::string n_rule;
    int instances = -1;
    int reps = -1;
    long long seed = -1;
    std::string out;
    int threads = -1;
    std::string env_variant;
    std::string kernel;
    double eta = -1, beta = -1, ell = -1, radius = -1;
    std::string q_mode;
    bool simplified = false;
    double cluster_side_exp = 0.0;
    double var_level = -1;
};

mabi::RunConfig build_config(const SimulateArgs& a) {
    mabi::KeyValueConfig kv;
    if (!a.config_path.empty())
        kv = mabi::KeyValueConfig::parse_file(a.config_path);
    if (!a.policy.empty())
        kv.set("run.policy", a.policy);
    if (a.horizon >= 0)
        kv.set("run.T", std::to_string(a.horizon));
    if (a.units >= 0)
        kv.set("run.N", std::to_string(a.units));
    if (!a.n_rule.empty())
        kv.set("run.N_rule", a.n_rule);
    if (a.instances >= 0)
        kv.set("run.instances", std::to_string(a.instances));
    if (a.reps >= 0)
        kv.set("run.reps", std::to_string(a.reps));
    if (a.seed >= 0)
        kv.set("run.seed", std::to_string(a.seed));
    if (!a.out.empty())
        kv.set("run.out", a.out);
    if (a.threads >= 0)
        kv.set("run.threads", std::to_string(a.threads));
    if (a.var_level >= 0)
        kv.set("run.var_level", std::to_string(a.var_level));
    if (!a.env_variant.empty())
        kv.set("env.variant", a.env_variant);
    if (!a.kernel.empty())
        kv.set("env.kernel", a.kernel);
    if (a.eta >= 0)
        kv.set("policy.eta", std::to_string(a.eta));
    if (a.beta >= 0)
        kv.set("policy.beta", std::to_string(a.beta));
    if (a.ell >= 0)
        kv.set("policy.ell", std::to_string(a.ell));
    if (a.radius >= 0)
        kv.set("policy.r", std::to_string(a.radius));
    if (!a.q_mode.empty())
        kv.set("policy.q_mode", a.q_mode);
    if (a.simplified)
        kv.set("policy.simplified_clustering", "true");
    if (a.cluster_side_exp != 0.0)
        kv.set("policy.cluster_side_exp", std::to_string(a.cluster_side_exp));
    return mabi::RunConfig::from_kv(kv);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mabi - bandit simulation with spatial interference"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand(
        "simulate", "Run a replication experiment and write summary.csv / runs.csv / manifest.json");
    simulate->add_option("--config", sim.config_path, "INI-style config file");
    simulate->add_option("--policy", sim.policy, "Comma list: sb, cr, fixed:<arm>");
    simulate->add_option("--T", sim.horizon, "Rounds per episode");
    simulate->add_option("--N", sim.units, "Units (perfect square for lattices)");
    simulate->add_option("--N-rule", sim.n_rule, "T2 or T3");
    simulate->add_option("--instances", sim.instances, "Environment instances");
    simulate->add_option("--reps", sim.reps, "Replications per instance");
    simulate->add_option("--seed", sim.seed, "Master seed");
    simulate->add_option("--out", sim.out, "Output directory");
    simulate->add_option("--threads", sim.threads, "Worker threads");
    simulate->add_option("--var-level", sim.var_level, "delta for the VaR column");
    simulate->add_option("--env", sim.env_variant,
                         "lattice-neighbor, uniform-constant or lower-bound");
    simulate->add_option("--kernel", sim.kernel, "sutva | kappa:<k> | power-law:<c> | tabulated:v;v");
    simulate->add_option("--eta", sim.eta, "Learning rate (default: derived)");
    simulate->add_option("--beta", sim.beta, "IX offset (default: derived)");
    simulate->add_option("--ell", sim.ell, "Cluster cell side (default: N^exp rule)");
    simulate->add_option("--r", sim.radius, "Exposure radius (default: derived)");
    simulate->add_option("--q-mode", sim.q_mode, "marginal or conditional");
    simulate->add_flag("--simplified-clustering", sim.simplified,
                       "Uniform cells without randomized boundaries");
    simulate->add_option("--cluster-side-exp", sim.cluster_side_exp,
                         "Exponent in cell_side = N^exp (default 0.25)");

    std::string figure = "n-eq-t2";
    double scale = 0.25;
    std::string fig_out = "figures";
    long long fig_seed = 20240801;
    int fig_threads = 1;
    auto* fig = app.add_subcommand("reproduce-fig",
                                   "Sweep T and emit the comparison curves (CSV + SVG)");
    fig->add_option("--figure", figure, "n-eq-t2, n-eq-t3 or var-curves");
    fig->add_option("--scale", scale, "Fraction of the full 100x200 protocol (default 0.25)");
    fig->add_option("--out", fig_out, "Output directory");
    fig->add_option("--seed", fig_seed, "Master seed");
    fig->add_option("--threads", fig_threads, "Worker threads");

    std::string suite = "all";
    long long val_seed = 20240801;
    auto* val = app.add_subcommand("validate", "Run a named invariant suite");
    val->add_option("--suite", suite,
                    "geometry, partition, environment, estimator, policy, lower-bound or all");
    val->add_option("--seed", val_seed, "Suite seed");

    int demo_horizon = 100;
    int demo_scale = 1;
    int demo_sequences = 10000;
    long long demo_seed = 20240801;
    std::string demo_out = "lower-bound";
    auto* demo = app.add_subcommand("lower-bound-demo",
                                    "Coin-average rewards and best-arm anti-concentration");
    demo->add_option("--T", demo_horizon, "Rounds");
    demo->add_option("--scale-param", demo_scale, "Window scale (perfect square)");
    demo->add_option("--sequences", demo_sequences, "Instances to draw");
    demo->add_option("--seed", demo_seed, "Master seed");
    demo->add_option("--out", demo_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (simulate->parsed()) {
            const mabi::RunConfig cfg = build_config(sim);
            const mabi::RunArtifacts art = mabi::run_experiment(cfg);
            std::cout << "wrote " << art.summary_csv.string() << "\n";
            std::cout << "wrote " << art.runs_csv.string() << "\n";
            std::cout << "wrote " << art.manifest_json.string() << " (hash " << art.manifest_hash
                      << ")\n";
            return 0;
        }
        if (fig->parsed())
            return mabi::reproduce_figure(figure, scale, static_cast<std::uint64_t>(fig_seed),
                                          fig_threads, fig_out, std::cout);
        if (val->parsed()) {
            const int fails =
                mabi::run_validation_suite(suite, static_cast<std::uint64_t>(val_seed), std::cout);
            return fails == 0 ? 0 : kExitValidation;
        }
        if (demo->parsed()) {
            const int status =
                mabi::lower_bound_demo(demo_horizon, demo_scale, demo_sequences,
                                       static_cast<std::uint64_t>(demo_seed), demo_out, std::cout);
            return status == 0 ? 0 : kExitValidation;
        }
    } catch (const mabi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitConfig;
}
