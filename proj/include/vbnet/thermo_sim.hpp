#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vbnet/fleet_config.hpp"

namespace vbnet {

/// Hourly exogenous drivers shared by every unit in a district.
struct EnvSeries {
    std::vector<std::int64_t> t;  ///< unix seconds, strictly increasing by 3600
    std::vector<double> T_out;    ///< °C
    std::vector<double> price;    ///< currency/kWh

    std::size_t size() const { return t.size(); }
    /// Throws DomainError on unequal lengths or non-hourly timestamps.
    void validate() const;
};

/// Simulated history of one unit. Row k describes hour k: the drivers
/// (T_out, price, P_ac) acting during the hour and the indoor temperature
/// reached at its end.
struct Trajectory {
    int unit_id = 0;
    EnvSeries env;
    std::vector<double> T_in;  ///< end-of-hour indoor temperature (raw), °C
    std::vector<double> P_ac;  ///< kW
    std::vector<double> soc;   ///< Φ(clamped T_in)
    double T_init = 0.0;       ///< state before row 0

    std::size_t size() const { return T_in.size(); }
};

enum class Integrator { Exact, Euler };

/// Newton cooling through one lumped resistance, kW.
double heat_gain_1r1c(double T_out, double T_in, double R);

/// Closed-form solution of the 1R-1C ODE over dt with constant inputs.
double step_exact(double T, double T_out, double P, const AcUnitSpec& unit, double dt);

/// One explicit Euler step of the 1R-1C ODE.
double step_euler(double T, double T_out, double P, const AcUnitSpec& unit, double dt);

/// Price min-max normalised over the trailing 24 h window ending at `hour`
/// (inclusive). A flat window maps to 0.5.
double normalized_price(const std::vector<double>& price, std::size_t hour);

/// Comfort setpoint tracking the normalised price: cheap hours pre-cool.
double price_setpoint(double p_norm, const AcUnitSpec& unit);

/// Band-clamped proportional command around the setpoint-holding power, kW.
double price_responsive_power(double T_now, double T_out, double T_set, const AcUnitSpec& unit);

/// Convenience overload evaluating the controller at `hour` of `env`.
double price_responsive_power(const EnvSeries& env, std::size_t hour, const AcUnitSpec& unit,
                              double T_now);

struct SimOptions {
    double dt = kSecondsPerHour;
    int substeps = 6;
    Integrator integrator = Integrator::Exact;
};

/// Runs the price-responsive controller against the 1R-1C plant for every
/// hour of `env`. Deterministic in its inputs.
Trajectory simulate_unit(const AcUnitSpec& unit, const EnvSeries& env, double T_init,
                         const SimOptions& opts = {});

/// Writes `timestamp,T_out,price,T_in,P_ac,soc`.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Reads a file produced by write_trajectory_csv. The pre-row-0 state is not
/// stored, so T_init is set to T_in[0].
Trajectory read_trajectory_csv(const std::filesystem::path& path, int unit_id);

}  // namespace vbnet
