#include "vbnet/checkpoint.hpp"

#include <fstream>

#include "vbnet/ad/optim.hpp"
#include "vbnet/baselines.hpp"
#include "vbnet/errors.hpp"
#include "vbnet/vbnet_model.hpp"

namespace vbnet {

std::unique_ptr<SocModel> make_model(const std::string& kind, const ExperimentConfig& cfg,
                                     std::size_t n_units, std::uint64_t seed) {
    if (kind == "vbnet") return std::make_unique<VbNet>(cfg, n_units, seed);
    return std::make_unique<BaselineModel>(baseline_kind_from_string(kind), cfg, n_units, seed);
}

void save_checkpoint(const std::filesystem::path& path, const SocModel& model,
                     const ExperimentConfig& cfg, std::size_t n_units, const NormStats& norm) {
    const nlohmann::json j{{"model", model.kind()},
                           {"config", cfg.to_json()},
                           {"n_units", n_units},
                           {"norm_stats", norm.to_json()},
                           {"params", ad::params_to_json(model.parameters())}};
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write checkpoint " + path.string(), 0);
    out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open checkpoint " + path.string(), 0);
    Checkpoint ck;
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        ck.config = config_from_json(j.at("config"));
        ck.n_units = j.at("n_units").get<std::size_t>();
        ck.norm = NormStats::from_json(j.at("norm_stats"));
        ck.model = make_model(j.at("model").get<std::string>(), ck.config, ck.n_units, 0);
        ad::ParamList params = ck.model->parameters();
        ad::params_from_json(j.at("params"), params);
    } catch (const nlohmann::json::exception& e) {
        throw IngestionError("checkpoint " + path.string() + ": " + e.what(), 0);
    }
    return ck;
}

}  // namespace vbnet
