#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mabi/config.hpp"
#include "mabi/environment.hpp"
#include "mabi/metrics.hpp"
#include "mabi/policy.hpp"

namespace mabi {

// Runs fn(0..n-1) on up to `threads` workers. Work items must not share
// mutable state; exceptions are re-thrown on the caller thread.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// The universe shared by every instance of a config.
std::shared_ptr<const UnitUniverse> build_universe(const RunConfig& cfg);

// The reward model of one instance, drawn from the "env" stream; independent
// of the policy under evaluation.
std::shared_ptr<const RewardModel> build_environment(const RunConfig& cfg,
                                                     const std::shared_ptr<const UnitUniverse>& universe,
                                                     int instance);

// Policy parameters with config gaps filled from the kernel defaults and the
// cluster-side rule (cell_side = N^cluster_side_exp).
struct ResolvedPolicy {
    PolicyConfig base;
    std::string name;
    double eta = 0.0;
    double beta = 0.0;
    double cell_side = 0.0;
    double exposure_radius = 0.0;
};
ResolvedPolicy resolve_policy(const PolicyConfig& p, const RunConfig& cfg,
                              const InterferenceKernel& kernel, double units);

// One episode of `policy` on `env`; ctx may be null for non-clustered kinds.
RunRecord run_episode(const RewardModel& env, const ResolvedPolicy& policy,
                      const ClusterContext* ctx, Rng arm_rng, Rng partition_rng,
                      std::uint64_t seed_tag);

// Full replication matrix: every policy on the same instances with shared
// arm/partition streams (paired comparisons). Results are reduced in
// (instance, replication) order whatever the parallelism.
struct PolicyResults {
    ResolvedPolicy policy;
    std::vector<std::vector<RegretSummary>> runs; // instances x replications
    std::vector<std::vector<double>> regrets() const;
};
std::vector<PolicyResults> run_matrix(const RunConfig& cfg);

// File-emitting front end (the `simulate` subcommand): summary.csv, runs.csv
// and manifest.json under cfg.out_dir. Byte-identical for identical configs
// and seeds at any parallelism degree.
struct RunArtifacts {
    std::filesystem::path summary_csv;
    std::filesystem::path runs_csv;
    std::filesystem::path manifest_json;
    std::string manifest_hash;
};
RunArtifacts run_experiment(const RunConfig& cfg);

// Hash carried by every CSV row; derived from the resolved config and seed.
std::string manifest_hash_hex(const RunConfig& cfg);

// Experiment presets: "n-eq-t2" and "n-eq-t3" sweep T over 10..50 and compare
// SB vs CR mean and upper-quantile regret; "var-curves" sweeps the empirical
// VaR at delta = exp(-T^(2/3)). scale shrinks instance/replication counts
// proportionally (1 = the full protocol of 100 instances x 200 replications).
int reproduce_figure(const std::string& which, double scale, std::uint64_t seed, int threads,
                     const std::string& out_dir, std::ostream& log);

// Named invariant suites (geometry, partition, environment, estimator,
// policy, lower-bound, or all). Prints one line per check; returns the number
// of failed checks.
int run_validation_suite(const std::string& suite, std::uint64_t seed, std::ostream& report);

// Demonstrates the adversarial instance: coin-average rewards, the best-arm
// anti-concentration frequency, and switchback regret under both the global
// and the interior-normalized reward convention.
int lower_bound_demo(int horizon, int scale, int sequences, std::uint64_t seed,
                     const std::string& out_dir, std::ostream& report);

} // namespace mabi
