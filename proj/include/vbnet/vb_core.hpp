#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "vbnet/fleet_config.hpp"

namespace vbnet {

/// Virtual-battery parameters of one unit.
struct VbParams {
    int unit_id = 0;
    double C_f = 0.0;             ///< capacity, J; time-invariant
    std::vector<double> P_loss;   ///< kW per step; negative when heat flows outward
    double gamma = 0.0;           ///< learned sensitivity; NaN when not identified
};

/// Φ: (T_max − T)/(T_max − T_min) after clamping T into the band.
double soc_from_temp(double T, double T_min, double T_max);

/// Φ⁻¹ on [0, 1]; throws DomainError outside.
double temp_from_soc(double S, double T_min, double T_max);

/// Analytic parameters for a 1R-1C unit. `T_state[t]` is the indoor
/// temperature at the start of step t, paired with `T_out[t]`.
VbParams oracle_params(const AcUnitSpec& unit, std::span<const double> T_out,
                       std::span<const double> T_state);

/// Oracle capacity C_th·(T_max − T_min), J.
double oracle_capacity(const AcUnitSpec& unit);

/// One clamped explicit step of the battery ODE (powers in kW).
double vb_step(double S, double P_ac, double P_loss, double C_f, double eta, double dt);

/// Rolls vb_step over a horizon starting from S0. Returns the post-step states.
std::vector<double> vb_rollout(double S0, std::span<const double> P_ac,
                               std::span<const double> P_loss, double C_f, double eta,
                               double dt);

/// `{unit_id, C_f_J, gamma, p_loss_kw}`; gamma is null when not identified.
nlohmann::json to_json(const VbParams& p);
VbParams vb_params_from_json(const nlohmann::json& j);

}  // namespace vbnet
