#include "vbnet/vb_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vbnet/errors.hpp"

namespace vbnet {

double soc_from_temp(double T, double T_min, double T_max) {
    if (!(T_min < T_max)) {
        throw DomainError("soc_from_temp: degenerate comfort band [" + std::to_string(T_min) +
                          ", " + std::to_string(T_max) + "]");
    }
    const double Tc = std::clamp(T, T_min, T_max);
    return (T_max - Tc) / (T_max - T_min);
}

double temp_from_soc(double S, double T_min, double T_max) {
    if (!(S >= 0.0 && S <= 1.0)) {
        throw DomainError("temp_from_soc: S outside [0, 1]: " + std::to_string(S));
    }
    if (!(T_min < T_max)) throw DomainError("temp_from_soc: degenerate comfort band");
    return T_max - S * (T_max - T_min);
}

double oracle_capacity(const AcUnitSpec& unit) { return unit.C_th * unit.band(); }

VbParams oracle_params(const AcUnitSpec& unit, std::span<const double> T_out,
                       std::span<const double> T_state) {
    if (T_out.size() != T_state.size()) {
        throw DomainError("oracle_params: T_out and T_state lengths differ");
    }
    VbParams p;
    p.unit_id = unit.id;
    p.C_f = oracle_capacity(unit);
    p.gamma = std::numeric_limits<double>::quiet_NaN();
    p.P_loss.resize(T_out.size());
    for (std::size_t t = 0; t < T_out.size(); ++t) p.P_loss[t] = (T_out[t] - T_state[t]) / unit.R;
    return p;
}

double vb_step(double S, double P_ac, double P_loss, double C_f, double eta, double dt) {
    const double raw = S + dt * (eta * P_ac - P_loss) * kWattsPerKilowatt / C_f;
    return std::clamp(raw, 0.0, 1.0);
}

std::vector<double> vb_rollout(double S0, std::span<const double> P_ac,
                               std::span<const double> P_loss, double C_f, double eta,
                               double dt) {
    if (P_ac.size() != P_loss.size()) throw DomainError("vb_rollout: series lengths differ");
    std::vector<double> out(P_ac.size());
    double S = S0;
    for (std::size_t t = 0; t < P_ac.size(); ++t) {
        S = vb_step(S, P_ac[t], P_loss[t], C_f, eta, dt);
        out[t] = S;
    }
    return out;
}

nlohmann::json to_json(const VbParams& p) {
    nlohmann::json j;
    j["unit_id"] = p.unit_id;
    j["C_f_J"] = p.C_f;
    j["gamma"] = std::isnan(p.gamma) ? nlohmann::json(nullptr) : nlohmann::json(p.gamma);
    j["p_loss_kw"] = p.P_loss;
    return j;
}

VbParams vb_params_from_json(const nlohmann::json& j) {
    VbParams p;
    p.unit_id = j.at("unit_id").get<int>();
    p.C_f = j.at("C_f_J").get<double>();
    p.gamma = j.at("gamma").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                      : j.at("gamma").get<double>();
    p.P_loss = j.at("p_loss_kw").get<std::vector<double>>();
    return p;
}

}  // namespace vbnet
