#include "vbnet/thermo_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "csv.hpp"
#include "vbnet/errors.hpp"
#include "vbnet/vb_core.hpp"

namespace vbnet {

void EnvSeries::validate() const {
    if (T_out.size() != t.size() || price.size() != t.size()) {
        throw DomainError("EnvSeries: column lengths differ");
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] - t[i - 1] != static_cast<std::int64_t>(kSecondsPerHour)) {
            throw DomainError("EnvSeries: timestamps not hourly at index " + std::to_string(i));
        }
    }
}

double heat_gain_1r1c(double T_out, double T_in, double R) { return (T_out - T_in) / R; }

double step_exact(double T, double T_out, double P, const AcUnitSpec& unit, double dt) {
    const double T_inf = T_out - unit.eta * P * unit.R;
    return T_inf + (T - T_inf) * std::exp(-dt / unit.time_constant());
}

double step_euler(double T, double T_out, double P, const AcUnitSpec& unit, double dt) {
    const double net_kw = heat_gain_1r1c(T_out, T, unit.R) - unit.eta * P;
    return T + dt * net_kw * kWattsPerKilowatt / unit.C_th;
}

double normalized_price(const std::vector<double>& price, std::size_t hour) {
    const std::size_t first = hour >= 23 ? hour - 23 : 0;
    const auto [lo, hi] = std::minmax_element(price.begin() + static_cast<std::ptrdiff_t>(first),
                                              price.begin() + static_cast<std::ptrdiff_t>(hour) + 1);
    const double span = *hi - *lo;
    if (span <= 0.0) return 0.5;
    return (price[hour] - *lo) / span;
}

double price_setpoint(double p_norm, const AcUnitSpec& unit) {
    return unit.T_min + unit.band() * p_norm;
}

double price_responsive_power(double T_now, double T_out, double T_set, const AcUnitSpec& unit) {
    const double gain = unit.P_max / unit.band();
    const double P_eq = std::max(0.0, (T_out - T_set) / (unit.eta * unit.R));
    return std::clamp(gain * (T_now - T_set) + P_eq, 0.0, unit.P_max);
}

double price_responsive_power(const EnvSeries& env, std::size_t hour, const AcUnitSpec& unit,
                              double T_now) {
    const double T_set = price_setpoint(normalized_price(env.price, hour), unit);
    return price_responsive_power(T_now, env.T_out[hour], T_set, unit);
}

Trajectory simulate_unit(const AcUnitSpec& unit, const EnvSeries& env, double T_init,
                         const SimOptions& opts) {
    unit.validate();
    env.validate();
    if (T_init < unit.T_min || T_init > unit.T_max) {
        throw DomainError("simulate_unit: T_init outside the comfort band");
    }
    if (!(opts.dt > 0.0) || opts.substeps < 1) throw DomainError("simulate_unit: bad step options");

    Trajectory traj;
    traj.unit_id = unit.id;
    traj.env = env;
    traj.T_init = T_init;
    const std::size_t n = env.size();
    traj.T_in.resize(n);
    traj.P_ac.resize(n);
    traj.soc.resize(n);

    const double h = opts.dt / opts.substeps;
    double T = T_init;
    for (std::size_t k = 0; k < n; ++k) {
        const double P = price_responsive_power(env, k, unit, T);
        for (int s = 0; s < opts.substeps; ++s) {
            T = opts.integrator == Integrator::Exact ? step_exact(T, env.T_out[k], P, unit, h)
                                                     : step_euler(T, env.T_out[k], P, unit, h);
        }
        if (!std::isfinite(T) || !std::isfinite(P)) {
            throw SimulationError("simulate_unit: non-finite state", k);
        }
        traj.P_ac[k] = P;
        traj.T_in[k] = T;
        traj.soc[k] = soc_from_temp(T, unit.T_min, unit.T_max);
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "timestamp,T_out,price,T_in,P_ac,soc\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << traj.env.t[k] << ',' << traj.env.T_out[k] << ',' << traj.env.price[k] << ','
            << traj.T_in[k] << ',' << traj.P_ac[k] << ',' << traj.soc[k] << '\n';
    }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, int unit_id) {
    const csv::Table table = csv::read(path);
    const std::vector<std::string> cols = {"timestamp", "T_out", "price", "T_in", "P_ac", "soc"};
    std::vector<std::size_t> idx;
    for (const auto& c : cols) idx.push_back(table.column(c));

    Trajectory traj;
    traj.unit_id = unit_id;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        traj.env.t.push_back(csv::parse_int(row[idx[0]], r + 1, cols[0]));
        traj.env.T_out.push_back(csv::parse_double(row[idx[1]], r + 1, cols[1]));
        traj.env.price.push_back(csv::parse_double(row[idx[2]], r + 1, cols[2]));
        traj.T_in.push_back(csv::parse_double(row[idx[3]], r + 1, cols[3]));
        traj.P_ac.push_back(csv::parse_double(row[idx[4]], r + 1, cols[4]));
        traj.soc.push_back(csv::parse_double(row[idx[5]], r + 1, cols[5]));
        if (r > 0 && traj.env.t[r] - traj.env.t[r - 1] != static_cast<std::int64_t>(kSecondsPerHour)) {
            throw IngestionError("non-hourly timestamp gap", r + 1);
        }
    }
    traj.T_init = traj.T_in.empty() ? 0.0 : traj.T_in.front();
    return traj;
}

}  // namespace vbnet
