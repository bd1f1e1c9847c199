#include "sbl/config.hpp"

#include <cmath>
#include <fstream>

namespace sbl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at '" + where + "': " + what);
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& section, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(section + "." + key, e.what());
    }
}

} // namespace

ContinuousModel model_from_json(const json& j) {
    ContinuousModel m;
    m.dimension = get_or<int>(j, "dimension", "model", 3);
    m.nu = NuProfile::parse(get_or<std::string>(j, "nu", "model", "linear"));
    m.mass = get_or<double>(j, "mass", "model", 0.0);
    m.amplitude = get_or<double>(j, "amplitude", "model", 1.0);
    m.delta = get_or<double>(j, "delta", "model", 0.0);
    m.cutoff = get_or<double>(j, "cutoff", "model", 1.0);
    if (m.dimension < 1) fail("model.dimension", "must be a positive integer");
    if (!(m.cutoff > 0.0)) fail("model.cutoff", "must be positive");
    if (m.mass < 0.0) fail("model.mass", "must be nonnegative");
    return m;
}

json model_to_json(const ContinuousModel& m) {
    return json{{"dimension", m.dimension}, {"nu", m.nu.name()},   {"mass", m.mass},
                {"amplitude", m.amplitude}, {"delta", m.delta},    {"cutoff", m.cutoff}};
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse failure in " + path + ": " + e.what());
    }
    return from_json(j);
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    cfg.raw = j;

    if (j.contains("model")) cfg.model = model_from_json(j.at("model"));
    if (j.contains("modes")) {
        std::vector<ModeSet::Mode> modes;
        try {
            for (const auto& entry : j.at("modes"))
                modes.push_back({entry.at(0).get<double>(), entry.at(1).get<double>()});
        } catch (const json::exception& e) {
            fail("modes", std::string("expected [[omega, v], ...]: ") + e.what());
        }
        try {
            cfg.explicit_modes = make_mode_set(std::move(modes));
        } catch (const std::exception& e) {
            fail("modes", e.what());
        }
    }
    if (j.contains("kernel_terms")) {
        // a dumped kernel: (weight, rate) pairs; weight = v^2/4 inverts exactly
        if (cfg.explicit_modes) fail("kernel_terms", "give either modes or kernel_terms");
        std::vector<ModeSet::Mode> modes;
        try {
            for (const auto& entry : j.at("kernel_terms")) {
                const double w = entry.at(0).get<double>();
                const double rate = entry.at(1).get<double>();
                if (w < 0.0) fail("kernel_terms", "weights must be nonnegative");
                modes.push_back({rate, 2.0 * std::sqrt(w)});
            }
        } catch (const json::exception& e) {
            fail("kernel_terms", std::string("expected [[weight, rate], ...]: ") + e.what());
        }
        try {
            cfg.explicit_modes = make_mode_set(std::move(modes));
        } catch (const std::exception& e) {
            fail("kernel_terms", e.what());
        }
    }
    if (!cfg.model && !cfg.explicit_modes)
        fail("model", "need a 'model' block, a 'modes' list, or a 'kernel_terms' list");

    if (j.contains("discretization")) {
        const auto& d = j.at("discretization");
        cfg.n_nodes = get_or<int>(d, "n_nodes", "discretization", cfg.n_nodes);
        try {
            cfg.rule = parse_rule(get_or<std::string>(d, "rule", "discretization",
                                                      rule_name(cfg.rule)));
        } catch (const std::exception& e) {
            fail("discretization.rule", e.what());
        }
        if (cfg.n_nodes < 1) fail("discretization.n_nodes", "must be >= 1");
    }

    if (j.contains("gibbs")) {
        const auto& g = j.at("gibbs");
        cfg.lambda = get_or<double>(g, "lambda", "gibbs", cfg.lambda);
        cfg.mu = get_or<double>(g, "mu", "gibbs", cfg.mu);
        if (g.contains("T")) {
            if (g.at("T").is_array())
                cfg.horizons = g.at("T").get<std::vector<double>>();
            else
                cfg.horizons = {g.at("T").get<double>()};
        }
        for (double T : cfg.horizons)
            if (!(T > 0.0)) fail("gibbs.T", "horizons must be positive");
        cfg.budget = get_or<long>(g, "budget", "gibbs", cfg.budget);
        cfg.burnin = get_or<long>(g, "burnin", "gibbs", cfg.burnin);
        cfg.seed = get_or<std::uint64_t>(g, "seed", "gibbs", cfg.seed);
        if (cfg.budget < 2) fail("gibbs.budget", "must be >= 2");
    }

    if (j.contains("fock")) {
        const auto& f = j.at("fock");
        cfg.cap = get_or<int>(f, "caps", "fock", cfg.cap);
        cfg.total_cap = get_or<int>(f, "total_cap", "fock", cfg.total_cap);
        cfg.max_dim = get_or<std::size_t>(f, "max_dim", "fock", cfg.max_dim);
        cfg.export_operator = get_or<bool>(f, "export_operator", "fock", cfg.export_operator);
        if (cfg.cap < 0) fail("fock.caps", "must be >= 0");
    }

    if (j.contains("susceptibility")) {
        const auto& s = j.at("susceptibility");
        if (s.contains("T_ladder"))
            cfg.susceptibility_ladder = s.at("T_ladder").get<std::vector<double>>();
        if (cfg.susceptibility_ladder.empty())
            fail("susceptibility.T_ladder", "must be non-empty");
        for (double T : cfg.susceptibility_ladder)
            if (!(T > 0.0)) fail("susceptibility.T_ladder", "horizons must be positive");
    }

    if (j.contains("mass_sweep")) {
        const auto& s = j.at("mass_sweep");
        if (s.contains("masses")) cfg.masses = s.at("masses").get<std::vector<double>>();
        cfg.sweep_T = get_or<double>(s, "T", "mass_sweep", cfg.sweep_T);
        cfg.epsilon = get_or<double>(s, "epsilon", "mass_sweep", cfg.epsilon);
        if (cfg.masses.empty()) fail("mass_sweep.masses", "must be non-empty");
    }

    if (j.contains("kernel")) {
        const auto& k = j.at("kernel");
        cfg.kernel_t_max = get_or<double>(k, "t_max", "kernel", cfg.kernel_t_max);
        cfg.kernel_points = get_or<int>(k, "n_points", "kernel", cfg.kernel_points);
        if (cfg.kernel_points < 2) fail("kernel.n_points", "must be >= 2");
    }

    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        cfg.fkn_sigma_max = get_or<double>(t, "fkn_sigma", "thresholds", cfg.fkn_sigma_max);
        cfg.energy_sigma_max =
            get_or<double>(t, "energy_sigma", "thresholds", cfg.energy_sigma_max);
    }
    return cfg;
}

ModeSet RunConfig::resolve_modes() const {
    if (explicit_modes) return *explicit_modes;
    return discretize(*model, n_nodes, rule);
}

TruncationSpec RunConfig::resolve_trunc(std::size_t n_modes) const {
    TruncationSpec t = TruncationSpec::uniform(n_modes, cap, total_cap);
    t.max_dimension = max_dim;
    return t;
}

std::string RunConfig::canonical() const { return raw.dump(); }

std::uint64_t RunConfig::config_hash() const {
    const std::string s = canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace sbl
