#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mabi/policy.hpp"

namespace mabi {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key-value store over "section.key" names, read from an INI-style file
// ([section] headers, key = value lines, # or ; comments). CLI flags override
// file values by writing into the same store.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_text(const std::string& text);

    void set(const std::string& key, std::string value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& items() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

enum class PolicyKindId : std::uint8_t { FixedArm, Switchback, Exp3HtIx };

struct PolicyConfig {
    PolicyKindId kind = PolicyKindId::Switchback;
    int fixed_arm = 0;
    // <= 0 means "derive from default_parameters / the cluster-side rule".
    double eta = 0.0;
    double beta = 0.0;
    double cell_side = 0.0;
    double exposure_radius = 0.0;
    QMode q_mode = QMode::Marginal;
    bool simplified_clustering = false;
    bool fixed_partition = false; // ablation: one realized partition per episode

    std::string name() const;
};

enum class EnvVariantId : std::uint8_t { LatticeNeighbor, UniformConstant, LowerBound };

struct EnvConfig {
    EnvVariantId variant = EnvVariantId::LatticeNeighbor;
    std::string kernel = "kappa:2";
    int neighborhood_radius = 2;       // lattice-neighbor
    std::vector<double> levels;        // uniform-constant
    int lower_bound_scale = 1;         // lower-bound: window half-width squared
};

// Fully resolved run description.
struct RunConfig {
    std::vector<PolicyConfig> policies;
    EnvConfig env;
    int arms = 2;
    int horizon = 10;          // T
    long long units = 0;       // N; 0 means "apply n_rule"
    std::string n_rule;        // "", "T2", "T3"
    int instances = 50;
    int replications = 100;
    std::uint64_t seed = 20240801;
    std::string out_dir = "out";
    int threads = 1;
    double var_level = 0.05;
    double cluster_side_exp = 0.25; // cell_side = N^exp when cell_side unset

    long long resolved_units() const;
    void validate() const;

    static RunConfig from_kv(const KeyValueConfig& kv);
    // Canonical listing used for the manifest and its hash.
    std::vector<std::pair<std::string, std::string>> describe() const;
};

// N for a given rule; T3 rounds to the nearest perfect square.
long long units_for_rule(const std::string& rule, int horizon);

} // namespace mabi
