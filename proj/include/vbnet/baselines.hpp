#pragma once

#include <string>

#include "vbnet/ad/layers.hpp"
#include "vbnet/fleet_config.hpp"
#include "vbnet/soc_model.hpp"

namespace vbnet {

enum class BaselineKind { Dense, Conv, Recurrent };

std::string to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(const std::string& name);

/// Black-box SOC predictor fed the same context, horizon drivers, initial
/// SOC and unit embedding as VB-NET, with no physics layer. Trained on plain
/// MSE; predictions are clamped to [0,1] only for evaluation.
class BaselineModel : public SocModel {
public:
    BaselineModel(BaselineKind kind, const ExperimentConfig& cfg, std::size_t n_units,
                  std::uint64_t seed);

    std::string kind() const override { return to_string(kind_); }
    BaselineKind baseline_kind() const { return kind_; }

    ad::Value predict(const Batch& batch) const override;
    ad::Value training_loss(const Batch& batch) const override;
    ad::Value evaluate(const Batch& batch) const override;
    ad::ParamList parameters() const override;

private:
    ad::Value static_features(const Batch& batch) const;
    /// [B,4,L+H]: T_out, T_in (zero over the horizon), P_ac, horizon flag.
    ad::Value sequence_channels(const Batch& batch) const;

    BaselineKind kind_;
    ExperimentConfig cfg_;
    std::size_t n_units_;
    ad::Embedding id_embed_;
    // dense
    ad::Dense d1_, d2_, d3_;
    // conv
    ad::Conv1d c1_, c2_;
    // recurrent
    ad::LstmCell cell_;
    // shared by conv and recurrent heads
    ad::Dense h1_, h2_;
};

}  // namespace vbnet
