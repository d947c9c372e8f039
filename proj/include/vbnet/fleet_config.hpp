#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vbnet {

inline constexpr double kWattsPerKilowatt = 1000.0;
inline constexpr double kSecondsPerHour = 3600.0;

/// Uniform thermal capacitance of every simulated unit, J/°C.
inline constexpr double kDefaultThermalCapacitance = 1.8e7;
/// Uniform coefficient of performance of every simulated unit.
inline constexpr double kDefaultCop = 0.97;

/// One air-conditioned zone under the 1R-1C model.
///
/// Table-facing units are kept (°C/kW, kW); the physics routines convert to
/// watts where power meets capacitance.
struct AcUnitSpec {
    int id = 0;
    double R = 0.0;      ///< thermal resistance, °C/kW
    double C_th = 0.0;   ///< thermal capacitance, J/°C
    double eta = 0.0;    ///< coefficient of performance
    double P_max = 0.0;  ///< rated electrical power, kW
    double T_min = 0.0;  ///< comfort lower bound, °C
    double T_max = 0.0;  ///< comfort upper bound, °C

    double band() const { return T_max - T_min; }
    /// R·C_th in seconds.
    double time_constant() const { return R / kWattsPerKilowatt * C_th; }

    /// Throws ConfigError if any field invariant is broken.
    void validate() const;
};

struct FleetSpec {
    std::vector<AcUnitSpec> units;
    double horizon_hours = 0.0;
    double dt = kSecondsPerHour;

    void validate() const;
};

/// Rows of the reference fleet (AC1..AC8) with uniform C_th and η.
/// n_units must be 4 or 8.
FleetSpec default_fleet(int n_units);

struct ExperimentConfig {
    int seq_len = 24;
    int rollout_len = 24;
    int stride = 24;
    double train_frac = 0.8;
    int hidden_dim = 64;
    int id_embed_dim = 8;
    double cap_min = 1e7;
    double cap_max = 2e8;
    double lambda = 1.0;
    double gamma_init = 0.5;
    double gamma_lr_scale = 10.0;  ///< learning-rate multiplier for the per-unit sensitivities
    double lr = 1e-3;
    int batch_size = 64;
    int epochs = 200;
    int patience = 20;
    double val_frac = 0.1;
    double alpha = 1.0;
    std::uint64_t seed = 7;
    int days = 92;
    int n_units = 4;
    double dt = kSecondsPerHour;
    int substeps = 6;
    int workers = 0;  ///< 0 = hardware concurrency

    void validate() const;
    nlohmann::json to_json() const;
    /// FNV-1a of the canonical JSON dump.
    std::uint64_t hash() const;
};

/// Applies the keys present in `j` on top of `base`. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

/// Reads a JSON object from `path`; an empty file yields all defaults.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Names of every recognised config key, sorted.
const std::vector<std::string>& config_keys();

}  // namespace vbnet
