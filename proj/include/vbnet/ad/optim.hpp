#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vbnet/ad/layers.hpp"

namespace vbnet::ad {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;
};

/// One bias-corrected adaptive-moment update in place. Throws TrainingError
/// naming `name` if any gradient entry is non-finite; nothing is modified then.
void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& state,
               double lr, const AdamHyper& hyper = {}, std::string_view name = {});

class Adam {
public:
    Adam(ParamList params, double lr, AdamHyper hyper = {});

    void zero_grad();
    void step();

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }

private:
    ParamList params_;
    std::vector<AdamMoments> state_;
    double lr_;
    AdamHyper hyper_;
};

/// Copy of every parameter's values, for best-epoch restore.
std::vector<std::vector<double>> snapshot(const ParamList& params);
void restore(ParamList& params, const std::vector<std::vector<double>>& snap);

/// `{name: {"shape": [...], "values": [...]}}`.
nlohmann::json params_to_json(const ParamList& params);
/// Loads values into existing parameters; names and shapes must match exactly.
void params_from_json(const nlohmann::json& j, ParamList& params);

}  // namespace vbnet::ad
