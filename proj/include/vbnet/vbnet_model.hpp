#pragma once

#include <functional>
#include <vector>

#include "vbnet/ad/layers.hpp"
#include "vbnet/batch.hpp"
#include "vbnet/fleet_config.hpp"
#include "vbnet/soc_model.hpp"

namespace vbnet {

struct NetOutput {
    ad::Value S_hat;       ///< [B,H] in [0,1]
    ad::Value C_f_hat;     ///< [B,1] J
    ad::Value P_loss_hat;  ///< [B,H] kW
    ad::Value dT_phy;      ///< [B,H] °C, against the reconstructed indoor temperature
    ad::Value h_env;       ///< [B,hidden]
    ad::Value h_state;     ///< [B,hidden]
    ad::Value h_fused;     ///< [B,2·hidden]
};

/// Power-loss provider for the physics layer: (horizon step, ΔT_phy[B,1]) → kW[B,1].
using LossFn = std::function<ad::Value(std::size_t step, const ad::Value& dT_phy)>;

struct PhysicsRollout {
    ad::Value S_hat;
    ad::Value P_loss;
    ad::Value dT_phy;
};

/// Non-trainable battery integrator over the batch horizon:
/// Ŝ ← clamp(Ŝ + dt·(η·P_ac − P_loss)/C_f, 0, 1), with ΔT_phy = T_out − Φ⁻¹(Ŝ).
/// Throws InferenceError on a non-positive capacity or a non-finite state.
PhysicsRollout physics_rollout(const Batch& batch, const ad::Value& C_f, const LossFn& loss,
                               double dt);

/// (1/N)·Σ‖Ŝ−S‖² + λ·mean‖ΔŜ−ΔS‖², differences along the horizon axis.
ad::Value composite_loss(const ad::Value& S_hat, const ad::Value& S_true, double lambda);

/// Gray-box identifier: shared weather encoder, private state encoder with
/// unit embeddings, static capacity head, sensitivity-modulated loss head
/// and the physics rollout.
class VbNet : public SocModel {
public:
    VbNet(const ExperimentConfig& cfg, std::size_t n_units, std::uint64_t seed);

    std::string kind() const override { return "vbnet"; }

    /// x_env[B,1,L] → h_env[B,hidden].
    ad::Value encode_shared(const ad::Value& x_env) const;
    /// [x_tin(L), p_last, μ, σ, e_ID] → h_state[B,hidden].
    ad::Value encode_private(const ad::Value& x_tin, const ad::Value& p_last, const ad::Value& mu,
                             const ad::Value& sigma, std::span<const int> units) const;
    /// σ(F_cap(e_ID, ΔT_range))·(C_max − C_min) + C_min, [B,1] J.
    ad::Value capacity_head(std::span<const int> units, const ad::Value& dT_range) const;
    /// P_base(h_fused, ΔT_phy)·(1 + γ_k), [B,1] kW.
    ad::Value loss_head(const ad::Value& h_fused, const ad::Value& dT_phy,
                        std::span<const int> units) const;

    NetOutput forward(const Batch& batch) const;

    ad::Value predict(const Batch& batch) const override { return forward(batch).S_hat; }
    ad::Value training_loss(const Batch& batch) const override;
    ad::ParamList parameters() const override;

    std::size_t n_units() const { return n_units_; }
    double gamma(int unit) const;
    const ExperimentConfig& config() const { return cfg_; }

private:
    ExperimentConfig cfg_;
    std::size_t n_units_;
    ad::Conv1d conv1_;
    ad::Conv1d conv2_;
    ad::Dense env_proj_;
    ad::Embedding id_embed_;
    ad::Dense private_;
    ad::Dense cap_hidden_;
    ad::Dense cap_out_;
    ad::Dense loss1_;
    ad::Dense loss2_;
    ad::Dense loss3_;
    ad::Value gamma_;  ///< [K,1]
};

}  // namespace vbnet
