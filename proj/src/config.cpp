#include "mabi/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mabi {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
    KeyValueConfig kv;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // inline comments: a '#' preceded by whitespace ends the line
        // (';' only comments out whole lines, it can appear inside values)
        for (std::size_t i = 1; i < line.size(); ++i) {
            if (line[i] == '#' && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.resize(i);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        kv.set(section.empty() ? key : section + "." + key, value);
    }
    return kv;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

void KeyValueConfig::set(const std::string& key, std::string value) {
    values_[key] = std::move(value);
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + it->second + "'");
    }
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + it->second + "'");
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string PolicyConfig::name() const {
    switch (kind) {
    case PolicyKindId::FixedArm: return "fixed:" + std::to_string(fixed_arm);
    case PolicyKindId::Switchback: return "switchback";
    case PolicyKindId::Exp3HtIx: return simplified_clustering ? "exp3-ht-ix-simplified" : "exp3-ht-ix";
    }
    return "?";
}

long long units_for_rule(const std::string& rule, int horizon) {
    if (rule == "T2")
        return static_cast<long long>(horizon) * horizon;
    if (rule == "T3") {
        const auto side = static_cast<long long>(
            std::llround(std::pow(static_cast<double>(horizon), 1.5)));
        return side * side;
    }
    throw ConfigError("unknown N rule '" + rule + "' (expected T2 or T3)");
}

long long RunConfig::resolved_units() const {
    if (units > 0)
        return units;
    if (n_rule.empty())
        throw ConfigError("either run.N or run.N_rule must be set");
    return units_for_rule(n_rule, horizon);
}

void RunConfig::validate() const {
    if (horizon < 1)
        throw ConfigError("run.T must be >= 1");
    if (instances < 1 || replications < 1)
        throw ConfigError("run.instances and run.reps must be >= 1");
    if (threads < 1)
        throw ConfigError("run.threads must be >= 1");
    if (!(var_level > 0.0 && var_level < 1.0))
        throw ConfigError("run.var_level must lie in (0, 1)");
    if (arms < 1)
        throw ConfigError("run.arms must be >= 1");
    if (policies.empty())
        throw ConfigError("no policy selected");
    const long long n = resolved_units();
    if (n < 1)
        throw ConfigError("run.N must be >= 1");
    if (env.variant == EnvVariantId::LatticeNeighbor) {
        const auto side = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(n))));
        if (side * side != n)
            throw ConfigError("run.N must be a perfect square for lattice environments");
    }
    for (const PolicyConfig& p : policies) {
        if (p.kind == PolicyKindId::FixedArm && (p.fixed_arm < 0 || p.fixed_arm >= arms))
            throw ConfigError("fixed-arm policy: arm out of range");
    }
}

namespace {

PolicyConfig parse_policy(const std::string& text, const KeyValueConfig& kv) {
    PolicyConfig p;
    if (text == "switchback" || text == "sb") {
        p.kind = PolicyKindId::Switchback;
    } else if (text == "exp3-ht-ix" || text == "cr") {
        p.kind = PolicyKindId::Exp3HtIx;
    } else if (text.rfind("fixed:", 0) == 0) {
        p.kind = PolicyKindId::FixedArm;
        p.fixed_arm = std::stoi(text.substr(6));
    } else {
        throw ConfigError("unknown policy '" + text + "'");
    }
    p.eta = kv.get_double("policy.eta", 0.0);
    p.beta = kv.get_double("policy.beta", 0.0);
    p.cell_side = kv.get_double("policy.ell", 0.0);
    p.exposure_radius = kv.get_double("policy.r", 0.0);
    const std::string qm = kv.get_string("policy.q_mode", "marginal");
    if (qm == "marginal")
        p.q_mode = QMode::Marginal;
    else if (qm == "conditional")
        p.q_mode = QMode::Conditional;
    else
        throw ConfigError("policy.q_mode must be marginal or conditional");
    p.simplified_clustering = kv.get_bool("policy.simplified_clustering", false);
    p.fixed_partition = kv.get_bool("policy.fixed_partition", false);
    return p;
}

} // namespace

RunConfig RunConfig::from_kv(const KeyValueConfig& kv) {
    RunConfig cfg;
    cfg.arms = static_cast<int>(kv.get_int("run.arms", 2));
    cfg.horizon = static_cast<int>(kv.get_int("run.T", 10));
    cfg.units = kv.get_int("run.N", 0);
    cfg.n_rule = kv.get_string("run.N_rule", cfg.units > 0 ? "" : "T2");
    cfg.instances = static_cast<int>(kv.get_int("run.instances", 50));
    cfg.replications = static_cast<int>(kv.get_int("run.reps", 100));
    cfg.seed = static_cast<std::uint64_t>(kv.get_int("run.seed", 20240801));
    cfg.out_dir = kv.get_string("run.out", "out");
    cfg.threads = static_cast<int>(kv.get_int("run.threads", 1));
    cfg.var_level = kv.get_double("run.var_level", 0.05);
    cfg.cluster_side_exp = kv.get_double("policy.cluster_side_exp", 0.25);

    const std::string variant = kv.get_string("env.variant", "lattice-neighbor");
    if (variant == "lattice-neighbor")
        cfg.env.variant = EnvVariantId::LatticeNeighbor;
    else if (variant == "uniform-constant")
        cfg.env.variant = EnvVariantId::UniformConstant;
    else if (variant == "lower-bound")
        cfg.env.variant = EnvVariantId::LowerBound;
    else
        throw ConfigError("unknown env.variant '" + variant + "'");
    cfg.env.kernel = kv.get_string("env.kernel", "kappa:2");
    cfg.env.neighborhood_radius = static_cast<int>(kv.get_int("env.neighborhood_radius", 2));
    cfg.env.lower_bound_scale = static_cast<int>(kv.get_int("env.scale", 1));
    if (kv.has("env.levels")) {
        std::istringstream ss(kv.get_string("env.levels", ""));
        std::string tok;
        while (std::getline(ss, tok, ';'))
            cfg.env.levels.push_back(std::stod(tok));
    }

    std::istringstream ss(kv.get_string("run.policy", "sb,cr"));
    std::string tok;
    while (std::getline(ss, tok, ','))
        cfg.policies.push_back(parse_policy(trim(tok), kv));

    cfg.validate();
    return cfg;
}

std::vector<std::pair<std::string, std::string>> RunConfig::describe() const {
    std::vector<std::pair<std::string, std::string>> out;
    auto num = [](double v) {
        std::ostringstream ss;
        ss.precision(12);
        ss << v;
        return ss.str();
    };
    std::string names;
    for (const PolicyConfig& p : policies)
        names += (names.empty() ? "" : ",") + p.name();
    out.emplace_back("run.policy", names);
    out.emplace_back("run.arms", std::to_string(arms));
    out.emplace_back("run.T", std::to_string(horizon));
    out.emplace_back("run.N", std::to_string(resolved_units()));
    out.emplace_back("run.N_rule", n_rule);
    out.emplace_back("run.instances", std::to_string(instances));
    out.emplace_back("run.reps", std::to_string(replications));
    out.emplace_back("run.seed", std::to_string(seed));
    out.emplace_back("run.var_level", num(var_level));
    std::string env_name;
    switch (env.variant) {
    case EnvVariantId::LatticeNeighbor: env_name = "lattice-neighbor"; break;
    case EnvVariantId::UniformConstant: env_name = "uniform-constant"; break;
    case EnvVariantId::LowerBound: env_name = "lower-bound"; break;
    }
    out.emplace_back("env.variant", env_name);
    out.emplace_back("env.kernel", env.kernel);
    out.emplace_back("env.neighborhood_radius", std::to_string(env.neighborhood_radius));
    if (!policies.empty()) {
        const PolicyConfig& p = policies.front();
        out.emplace_back("policy.eta", num(p.eta));
        out.emplace_back("policy.beta", num(p.beta));
        out.emplace_back("policy.ell", num(p.cell_side));
        out.emplace_back("policy.r", num(p.exposure_radius));
        out.emplace_back("policy.q_mode", p.q_mode == QMode::Marginal ? "marginal" : "conditional");
        out.emplace_back("policy.simplified_clustering",
                         p.simplified_clustering ? "true" : "false");
        out.emplace_back("policy.fixed_partition", p.fixed_partition ? "true" : "false");
        out.emplace_back("policy.cluster_side_exp", num(cluster_side_exp));
    }
    return out;
}

} // namespace mabi
