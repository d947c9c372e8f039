#include "vbnet/fleet_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "vbnet/errors.hpp"

namespace vbnet {

namespace {

struct TableRow {
    double R;
    double P_max;
    double T_min;
    double T_max;
};

constexpr TableRow kReferenceFleet[] = {
    {3.0, 12.0, 21.0, 24.0},  // AC1
    {3.5, 12.0, 22.0, 24.0},  // AC2
    {5.0, 13.0, 21.0, 24.0},  // AC3
    {6.0, 10.0, 20.0, 23.0},  // AC4
    {5.0, 12.0, 21.0, 24.0},  // AC5
    {5.5, 11.0, 22.0, 25.0},  // AC6
    {6.5, 10.0, 20.0, 22.0},  // AC7
    {6.0, 12.0, 20.0, 23.0},  // AC8
};

void require(bool ok, const std::string& key, const std::string& rule) {
    if (!ok) throw ConfigError(key + ": " + rule);
}

}  // namespace

void AcUnitSpec::validate() const {
    const std::string tag = "unit " + std::to_string(id) + " ";
    require(R > 0.0, tag + "R", "R > 0");
    require(C_th > 0.0, tag + "C_th", "C_th > 0");
    require(eta > 0.0 && eta <= 10.0, tag + "eta", "0 < eta <= 10");
    require(P_max > 0.0, tag + "P_max", "P_max > 0");
    require(T_min < T_max, tag + "T_min", "T_min < T_max");
}

void FleetSpec::validate() const {
    require(dt > 0.0, "dt", "dt > 0");
    for (std::size_t i = 0; i < units.size(); ++i) {
        units[i].validate();
        require(units[i].id == static_cast<int>(i), "unit id",
                "ids must be unique and contiguous from 0");
    }
}

FleetSpec default_fleet(int n_units) {
    if (n_units != 4 && n_units != 8) {
        throw ConfigError("n_units: must be 4 or 8, got " + std::to_string(n_units));
    }
    FleetSpec fleet;
    for (int i = 0; i < n_units; ++i) {
        const TableRow& row = kReferenceFleet[i];
        fleet.units.push_back(AcUnitSpec{i, row.R, kDefaultThermalCapacitance, kDefaultCop,
                                         row.P_max, row.T_min, row.T_max});
    }
    fleet.validate();
    return fleet;
}

void ExperimentConfig::validate() const {
    require(seq_len > 0 && seq_len % 4 == 0, "seq_len", "seq_len > 0 and divisible by 4");
    require(rollout_len >= 2, "rollout_len", "rollout_len >= 2");
    require(stride > 0, "stride", "stride > 0");
    require(train_frac > 0.0 && train_frac <= 1.0, "train_frac", "0 < train_frac <= 1");
    require(hidden_dim > 0, "hidden_dim", "hidden_dim > 0");
    require(id_embed_dim > 0, "id_embed_dim", "id_embed_dim > 0");
    require(cap_min > 0.0, "cap_min", "cap_min > 0");
    require(cap_min < cap_max, "cap_min", "cap_min < cap_max");
    require(lambda >= 0.0, "lambda", "lambda ≥ 0");
    require(lr >= 0.0, "lr", "lr ≥ 0");
    require(batch_size > 0, "batch_size", "batch_size > 0");
    require(epochs >= 0, "epochs", "epochs ≥ 0");
    require(patience > 0, "patience", "patience > 0");
    require(val_frac >= 0.0 && val_frac < 1.0, "val_frac", "0 ≤ val_frac < 1");
    require(alpha > 0.0 && alpha <= 1.0, "alpha", "0 < alpha ≤ 1");
    require(days >= 2, "days", "days ≥ 2");
    require(n_units == 4 || n_units == 8, "n_units", "n_units ∈ {4, 8}");
    require(dt > 0.0, "dt", "dt > 0");
    require(substeps >= 1, "substeps", "substeps ≥ 1");
    require(workers >= 0, "workers", "workers ≥ 0");
    require(gamma_lr_scale > 0.0, "gamma_lr_scale", "gamma_lr_scale > 0");
}

nlohmann::json ExperimentConfig::to_json() const {
    return nlohmann::json{
        {"seq_len", seq_len},       {"rollout_len", rollout_len},
        {"stride", stride},         {"train_frac", train_frac},
        {"hidden_dim", hidden_dim}, {"id_embed_dim", id_embed_dim},
        {"cap_min", cap_min},       {"cap_max", cap_max},
        {"lambda", lambda},         {"gamma_init", gamma_init},
        {"gamma_lr_scale", gamma_lr_scale},
        {"lr", lr},                 {"batch_size", batch_size},
        {"epochs", epochs},         {"patience", patience},
        {"val_frac", val_frac},     {"alpha", alpha},
        {"seed", seed},             {"days", days},
        {"n_units", n_units},       {"dt", dt},
        {"substeps", substeps},     {"workers", workers},
    };
}

std::uint64_t ExperimentConfig::hash() const {
    // workers only affects scheduling, never results
    nlohmann::json j = to_json();
    j.erase("workers");
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        const nlohmann::json defaults = ExperimentConfig{}.to_json();
        for (const auto& [k, v] : defaults.items()) out.push_back(k);
        return out;
    }();
    return keys;
}

namespace {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer() && !it->is_number_unsigned()) {
                throw ConfigError(std::string(key) + ": expected an integer");
            }
        } else {
            if (!it->is_number()) throw ConfigError(std::string(key) + ": expected a number");
        }
        out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
    if (j.is_null()) {
        c.validate();
        return c;
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    const auto& known = config_keys();
    const std::set<std::string> known_set(known.begin(), known.end());
    for (const auto& [k, v] : j.items()) {
        if (!known_set.count(k)) throw ConfigError(k + ": unknown config key");
    }
    read_key(j, "seq_len", c.seq_len);
    read_key(j, "rollout_len", c.rollout_len);
    read_key(j, "stride", c.stride);
    read_key(j, "train_frac", c.train_frac);
    read_key(j, "hidden_dim", c.hidden_dim);
    read_key(j, "id_embed_dim", c.id_embed_dim);
    read_key(j, "cap_min", c.cap_min);
    read_key(j, "cap_max", c.cap_max);
    read_key(j, "lambda", c.lambda);
    read_key(j, "gamma_init", c.gamma_init);
    read_key(j, "gamma_lr_scale", c.gamma_lr_scale);
    read_key(j, "lr", c.lr);
    read_key(j, "batch_size", c.batch_size);
    read_key(j, "epochs", c.epochs);
    read_key(j, "patience", c.patience);
    read_key(j, "val_frac", c.val_frac);
    read_key(j, "alpha", c.alpha);
    read_key(j, "seed", c.seed);
    read_key(j, "days", c.days);
    read_key(j, "n_units", c.n_units);
    read_key(j, "dt", c.dt);
    read_key(j, "substeps", c.substeps);
    read_key(j, "workers", c.workers);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return config_from_json(nullptr);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: parse failure in " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace vbnet
