#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vbnet/fleet_config.hpp"
#include "vbnet/thermo_sim.hpp"

namespace vbnet {

/// One context window followed directly by a rollout horizon.
///
/// The horizon carries only exogenous drivers; indoor temperature over the
/// horizon exists solely as the SOC target.
struct Sample {
    int unit_id = 0;
    std::size_t start = 0;       ///< trajectory row of the first context step
    std::int64_t start_time = 0;

    std::vector<double> ctx_T_out;
    std::vector<double> ctx_T_in;
    std::vector<double> ctx_P_ac;
    std::vector<double> hz_T_out;
    std::vector<double> hz_P_ac;

    double S0 = 0.0;              ///< SOC at the last context step
    std::vector<double> S_true;   ///< SOC at the end of each horizon step

    double mu_Tin = 0.0;
    double sigma_Tin = 0.0;
    double T_min = 0.0;
    double T_max = 0.0;
    double eta = 0.0;

    double dT_range() const { return T_max - T_min; }
    std::size_t horizon_start() const { return start + ctx_T_in.size(); }
};

enum class Feature { T_out = 0, T_in, P_ac, mu_Tin, sigma_Tin, dT_range, Count };

/// Standardisation statistics, computed on a training split only.
struct NormStats {
    static constexpr double kStdFloor = 1e-6;
    std::array<double, static_cast<std::size_t>(Feature::Count)> mean{};
    std::array<double, static_cast<std::size_t>(Feature::Count)> std{};

    double apply(Feature f, double v) const {
        const auto i = static_cast<std::size_t>(f);
        return (v - mean[i]) / std[i];
    }
    nlohmann::json to_json() const;
    static NormStats from_json(const nlohmann::json& j);
};

NormStats compute_norm_stats(const std::vector<Sample>& train);

struct EnvSynthOptions {
    double ar_sigma = 0.8;     ///< innovation std of the AR(1) weather noise, °C
    double ar_phi = 0.7;
    double price_noise = 0.02;
    std::int64_t start = 1593561600;  ///< 2020-07-01T00:00Z
};

/// Diurnal outdoor temperature with AR(1) noise and a three-level
/// time-of-use tariff. Deterministic per seed.
EnvSeries synth_env(int days, std::uint64_t seed, const EnvSynthOptions& opts = {});

/// Time-of-use tariff level for an hour of day (before noise).
double tou_price(int hour_of_day);

void export_env_csv(const EnvSeries& env, const std::filesystem::path& path);
/// Reads `timestamp,T_out,price`; rejects missing columns, gaps and non-finite values.
EnvSeries import_env_csv(const std::filesystem::path& path);

/// Windows of seq_len context + rollout_len horizon every `stride` rows.
/// Returns an empty list (with a warning on stderr) when the trajectory is too short.
std::vector<Sample> make_samples(const Trajectory& traj, const AcUnitSpec& unit, int seq_len = 24,
                                 int rollout_len = 24, int stride = 24);

/// First ⌈train_frac·n⌉ samples train, the rest test. Input must be time-ordered.
std::pair<std::vector<Sample>, std::vector<Sample>> chrono_split(const std::vector<Sample>& samples,
                                                                 double train_frac = 0.8);

/// Number of samples kept by cold_start_subset for n samples.
std::size_t cold_start_count(std::size_t n, double alpha);

/// Most recent ⌈alpha·n⌉ samples. Throws DomainError if that is empty.
std::vector<Sample> cold_start_subset(const std::vector<Sample>& train, double alpha);

/// Per-unit data set split chronologically.
struct UnitData {
    AcUnitSpec unit;
    Trajectory traj;
    std::vector<Sample> train;
    std::vector<Sample> test;
};

/// Simulates every unit of `fleet` against one shared environment and windows
/// the result according to `cfg`.
std::vector<UnitData> build_fleet_data(const FleetSpec& fleet, const EnvSeries& env,
                                       const ExperimentConfig& cfg);

/// Windows already-simulated trajectories.
std::vector<UnitData> window_fleet_data(const FleetSpec& fleet, std::vector<Trajectory> trajs,
                                        const ExperimentConfig& cfg);

/// One CSV per unit plus manifest.json.
void write_dataset(const std::filesystem::path& dir, const std::vector<UnitData>& data,
                   const ExperimentConfig& cfg);

struct Dataset {
    FleetSpec fleet;
    std::vector<Trajectory> trajectories;
    int seq_len = 24;
    int rollout_len = 24;
    std::size_t split_index = 0;
    NormStats norm_stats;
};

Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace vbnet
