#include "vbnet/vbnet_model.hpp"

#include <algorithm>
#include <cmath>

#include "vbnet/ad/ops.hpp"
#include "vbnet/errors.hpp"

namespace vbnet {

using ad::Value;

namespace {

Value column(const Value& m, std::size_t t) {
    const std::size_t B = m.shape()[0];
    const std::size_t H = m.shape()[1];
    std::vector<double> col(B);
    for (std::size_t b = 0; b < B; ++b) col[b] = m.data()[b * H + t];
    return Value::matrix(B, 1, std::move(col));
}

}  // namespace

PhysicsRollout physics_rollout(const Batch& batch, const Value& C_f, const LossFn& loss,
                               double dt) {
    const std::size_t H = batch.horizon;
    for (double c : C_f.data()) {
        if (!(c > 0.0) || !std::isfinite(c)) throw InferenceError("capacity must be positive", 0);
    }
    const Value band = ad::sub(batch.T_max, batch.T_min);
    std::vector<Value> states, losses, drives;
    states.reserve(H);
    losses.reserve(H);
    drives.reserve(H);

    Value S = batch.S0;
    const double gain = dt * kWattsPerKilowatt;
    for (std::size_t t = 0; t < H; ++t) {
        const Value T_hat = ad::sub(batch.T_max, ad::mul(S, band));
        const Value dT_phy = ad::sub(column(batch.hz_T_out, t), T_hat);
        const Value P_loss = loss(t, dT_phy);
        const Value net = ad::sub(ad::mul(batch.eta, column(batch.hz_p, t)), P_loss);
        S = ad::clamp(ad::add(S, ad::scale(ad::div(net, C_f), gain)), 0.0, 1.0);
        for (double v : S.data()) {
            if (!std::isfinite(v)) throw InferenceError("non-finite SOC", t);
        }
        for (double v : P_loss.data()) {
            if (!std::isfinite(v)) throw InferenceError("non-finite power loss", t);
        }
        states.push_back(S);
        losses.push_back(P_loss);
        drives.push_back(dT_phy);
    }
    return {ad::concat_cols(states), ad::concat_cols(losses), ad::concat_cols(drives)};
}

Value composite_loss(const Value& S_hat, const Value& S_true, double lambda) {
    if (S_hat.shape() != S_true.shape() || S_hat.tensor().rank() != 2) {
        throw ShapeError("composite_loss: shape mismatch " + ad::to_string(S_hat.shape()) + " vs " +
                         ad::to_string(S_true.shape()));
    }
    const std::size_t H = S_hat.shape()[1];
    if (H < 2) throw ShapeError("composite_loss: horizon must be ≥ 2");
    Value value_term = ad::mse(S_hat, S_true);
    if (lambda == 0.0) return value_term;
    const Value d_hat = ad::sub(ad::slice_cols(S_hat, 1, H - 1), ad::slice_cols(S_hat, 0, H - 1));
    const Value d_true =
        ad::sub(ad::slice_cols(S_true, 1, H - 1), ad::slice_cols(S_true, 0, H - 1));
    return ad::add(value_term, ad::scale(ad::mse(d_hat, d_true), lambda));
}

VbNet::VbNet(const ExperimentConfig& cfg, std::size_t n_units, std::uint64_t seed)
    : cfg_(cfg), n_units_(n_units) {
    cfg_.validate();
    if (n_units == 0) throw ConfigError("n_units: model needs at least one unit");
    ad::Rng rng(seed);
    const auto L = static_cast<std::size_t>(cfg.seq_len);
    const auto hidden = static_cast<std::size_t>(cfg.hidden_dim);
    const auto emb = static_cast<std::size_t>(cfg.id_embed_dim);

    conv1_ = ad::Conv1d(1, 16, 3, 1, rng);
    conv2_ = ad::Conv1d(16, 32, 3, 1, rng);
    env_proj_ = ad::Dense(32 * (L / 4), hidden, rng);
    id_embed_ = ad::Embedding(n_units, emb, rng);
    private_ = ad::Dense(L + 3 + emb, hidden, rng);
    cap_hidden_ = ad::Dense(emb + 1, 32, rng);
    cap_out_ = ad::Dense(32, 1, rng);
    loss1_ = ad::Dense(2 * hidden + 1, 64, rng);
    loss2_ = ad::Dense(64, 32, rng);
    loss3_ = ad::Dense(32, 1, rng);
    gamma_ = Value::parameter(ad::Tensor({n_units, 1}, cfg.gamma_init));
    // The head starts at zero loss so early rollouts are driven by P_ac alone.
    ad::Value w3 = loss3_.weight();
    std::fill(w3.mutable_data().begin(), w3.mutable_data().end(), 0.0);
    ad::Value b3 = loss3_.bias();
    std::fill(b3.mutable_data().begin(), b3.mutable_data().end(), 0.0);
}

Value VbNet::encode_shared(const Value& x_env) const {
    const auto L = static_cast<std::size_t>(cfg_.seq_len);
    if (x_env.tensor().rank() != 3 || x_env.shape()[1] != 1 || x_env.shape()[2] != L) {
        throw ShapeError("encode_shared: expected [B,1," + std::to_string(L) + "], got " +
                         ad::to_string(x_env.shape()));
    }
    Value h = ad::maxpool1d(ad::relu(conv1_(x_env)), 2);
    h = ad::maxpool1d(ad::relu(conv2_(h)), 2);
    const std::size_t B = x_env.shape()[0];
    h = ad::reshape(h, {B, h.size() / B});
    return env_proj_(h);
}

Value VbNet::encode_private(const Value& x_tin, const Value& p_last, const Value& mu,
                            const Value& sigma, std::span<const int> units) const {
    for (int u : units) {
        if (u < 0 || static_cast<std::size_t>(u) >= n_units_) {
            throw LookupError("encode_private: unknown unit id " + std::to_string(u));
        }
    }
    const Value x = ad::concat_cols({x_tin, p_last, mu, sigma, id_embed_(units)});
    return ad::relu(private_(x));
}

Value VbNet::capacity_head(std::span<const int> units, const Value& dT_range) const {
    const Value z = ad::relu(cap_hidden_(ad::concat_cols({id_embed_(units), dT_range})));
    const Value unit_interval = ad::sigmoid(cap_out_(z));
    return ad::add_scalar(ad::scale(unit_interval, cfg_.cap_max - cfg_.cap_min), cfg_.cap_min);
}

Value VbNet::loss_head(const Value& h_fused, const Value& dT_phy, std::span<const int> units) const {
    Value z = ad::relu(loss1_(ad::concat_cols({h_fused, dT_phy})));
    z = ad::relu(loss2_(z));
    const Value base = loss3_(z);
    return ad::mul(base, ad::add_scalar(ad::gather_rows(gamma_, units), 1.0));
}

NetOutput VbNet::forward(const Batch& batch) const {
    NetOutput out;
    out.h_env = encode_shared(batch.x_env);
    out.h_state = encode_private(batch.x_tin, batch.p_last, batch.mu, batch.sigma, batch.units);
    out.h_fused = ad::concat_cols({out.h_env, out.h_state});
    out.C_f_hat = capacity_head(batch.units, batch.dT_range);

    // h_fused is fixed over the horizon, so its share of the first loss-head
    // layer is computed once; per step only the ΔT_phy column is added.
    const std::size_t fused = out.h_fused.shape()[1];
    const Value W_fused = ad::slice_rows(loss1_.weight(), 0, fused);
    const Value w_drive = ad::slice_rows(loss1_.weight(), fused, 1);
    const Value pre = ad::add_row(ad::matmul(out.h_fused, W_fused), loss1_.bias());
    const Value modulation = ad::add_scalar(ad::gather_rows(gamma_, batch.units), 1.0);

    const LossFn head = [&](std::size_t, const Value& dT_phy) {
        Value z = ad::relu(ad::add(pre, ad::matmul(dT_phy, w_drive)));
        z = ad::relu(loss2_(z));
        return ad::mul(loss3_(z), modulation);
    };
    PhysicsRollout r = physics_rollout(batch, out.C_f_hat, head, cfg_.dt);
    out.S_hat = std::move(r.S_hat);
    out.P_loss_hat = std::move(r.P_loss);
    out.dT_phy = std::move(r.dT_phy);
    return out;
}

Value VbNet::training_loss(const Batch& batch) const {
    return composite_loss(predict(batch), batch.S_true, cfg_.lambda);
}

ad::ParamList VbNet::parameters() const {
    ad::ParamList p;
    conv1_.collect("shared.conv1", p);
    conv2_.collect("shared.conv2", p);
    env_proj_.collect("shared.proj", p);
    id_embed_.collect("id_embedding", p);
    private_.collect("private.dense", p);
    cap_hidden_.collect("capacity.hidden", p);
    cap_out_.collect("capacity.out", p);
    loss1_.collect("loss.dense1", p);
    loss2_.collect("loss.dense2", p);
    loss3_.collect("loss.dense3", p);
    p.push_back({"loss.gamma", gamma_, cfg_.gamma_lr_scale});
    return p;
}

double VbNet::gamma(int unit) const {
    if (unit < 0 || static_cast<std::size_t>(unit) >= n_units_) {
        throw LookupError("gamma: unknown unit id " + std::to_string(unit));
    }
    return gamma_.data()[static_cast<std::size_t>(unit)];
}

}  // namespace vbnet
