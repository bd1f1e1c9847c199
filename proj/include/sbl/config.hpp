// config.hpp -- run configuration: JSON loading, canonical echo, hashing

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbl/fock.hpp"
#include "sbl/model.hpp"

namespace sbl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every run is fully determined by (config, seed); the canonical form is
// echoed into all outputs.
struct RunConfig {
    nlohmann::json raw;

    std::optional<ContinuousModel> model;
    std::optional<ModeSet> explicit_modes;

    int n_nodes = 64;
    QuadratureRule rule = QuadratureRule::GaussLegendre;

    double lambda = 0.0;
    double mu = 0.0;
    std::vector<double> horizons{4.0};
    long budget = 100'000;
    long burnin = 10'000;
    std::uint64_t seed = 1;
    int workers = 1;

    int cap = 12;
    int total_cap = -1;
    std::size_t max_dim = 2'000'000;
    bool export_operator = false;

    std::vector<double> susceptibility_ladder{5.0, 10.0, 20.0, 40.0};
    std::vector<double> masses{1.0, 0.3, 0.1, 0.03};
    double sweep_T = 20.0;
    double epsilon = 0.5; // correlation-bound budget; not fixed by theory

    double kernel_t_max = 5.0;
    int kernel_points = 101;

    double fkn_sigma_max = 4.0;
    double energy_sigma_max = 3.0;

    static RunConfig load(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j);

    ModeSet resolve_modes() const;
    TruncationSpec resolve_trunc(std::size_t n_modes) const;

    std::string canonical() const;   // sorted-key dump of raw
    std::uint64_t config_hash() const; // FNV-1a of the canonical form
};

ContinuousModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ContinuousModel& m);

} // namespace sbl
