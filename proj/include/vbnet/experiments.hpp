#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vbnet/baselines.hpp"
#include "vbnet/data_pipeline.hpp"
#include "vbnet/training.hpp"
#include "vbnet/vbnet_model.hpp"

namespace vbnet {

/// Deterministic child seed for a named sub-task.
std::uint64_t derive_seed(std::uint64_t base, const std::string& tag);

/// Runs fn(0..n-1) on up to `workers` threads (0 = hardware concurrency).
/// The first exception thrown by any task is rethrown after all tasks stop.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct UnitMetrics {
    int unit_id = 0;
    double rmse = 0.0;
    double r2 = 0.0;
};

struct ModelMetrics {
    std::string model;
    std::vector<UnitMetrics> units;
    double rmse = 0.0;  ///< over every test step of every unit
    double r2 = 0.0;
    int epochs_run = 0;
    int best_epoch = -1;
    std::size_t parameter_count = 0;

    const UnitMetrics& unit(int id) const;
};

/// Identified battery parameters for one unit next to their oracles.
struct PhysicalUnit {
    int unit_id = 0;
    double C_f_hat = 0.0;
    double C_f_oracle = 0.0;
    double slope = 0.0;      ///< least-squares dP̂_loss/dΔT_phy over test rollout steps, kW/°C
    double intercept = 0.0;
    double inv_R = 0.0;      ///< 1/R, kW/°C
    double gamma = 0.0;
};

struct MetricReport {
    ExperimentConfig config;
    std::vector<ModelMetrics> models;
    std::vector<PhysicalUnit> physical;

    const ModelMetrics& model(const std::string& name) const;
    const PhysicalUnit& physical_unit(int id) const;
    nlohmann::json to_json() const;
};

/// Test-set RMSE/R² per unit and overall.
ModelMetrics evaluate_model(const SocModel& model, const std::vector<UnitData>& data,
                            const NormStats& norm);

/// One row per test rollout step of a trained VB-NET.
struct RolloutRow {
    int unit_id = 0;
    std::int64_t timestamp = 0;
    std::size_t sample = 0;
    std::size_t step = 0;
    double S_true = 0.0;
    double S_hat = 0.0;
    double dT_phy = 0.0;
    double P_loss_hat = 0.0;
    double P_loss_oracle = 0.0;
    double C_f_hat = 0.0;
};

std::vector<RolloutRow> rollout_table(const VbNet& net, const std::vector<UnitData>& data,
                                      const NormStats& norm);

/// Capacity, loss slope and γ per unit from a rollout table.
std::vector<PhysicalUnit> physical_analysis(const VbNet& net, const std::vector<UnitData>& data,
                                            std::span<const RolloutRow> rows);

struct RunOptions {
    std::filesystem::path out_dir;  ///< empty: no artifacts
    std::ostream* log = nullptr;    ///< progress lines, may be null
};

/// Trains VB-NET and every baseline on the 4-unit fleet and evaluates them on
/// the chronological test split. With an output directory it writes
/// report.json and the plot-data CSVs.
MetricReport run_case_a(const ExperimentConfig& cfg, const RunOptions& opts = {});

inline const std::vector<double> kCaseBAlphas = {0.02, 0.04, 0.06, 0.08, 0.10, 0.25, 0.50, 1.00};

struct CaseBCell {
    std::string method;  ///< "stl" or "mtl"
    double alpha = 0.0;
    std::size_t new_unit_train = 0;
    double rmse = 0.0;
    int epochs_run = 0;
};

struct CaseBReport {
    ExperimentConfig config;
    int n_mature = 0;
    int new_unit = 0;
    std::vector<CaseBCell> cells;

    /// Throws LookupError for a missing cell.
    double rmse(const std::string& method, double alpha) const;
    nlohmann::json to_json() const;
};

/// Cold-start grid for a fleet of n_mature + 1 units (n_mature ∈ {3, 7}); the
/// last unit of the fleet is the newcomer. With an output directory it writes
/// case_b_<n_mature>.csv and case_b_<n_mature>.json.
CaseBReport run_case_b(const ExperimentConfig& cfg, int n_mature, std::span<const double> alphas,
                       const RunOptions& opts = {});

/// Writes `j` with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace vbnet
