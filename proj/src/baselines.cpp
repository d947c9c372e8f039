#include "vbnet/baselines.hpp"

#include "vbnet/ad/ops.hpp"
#include "vbnet/errors.hpp"

namespace vbnet {

using ad::Value;

namespace {
constexpr std::size_t kChannels = 4;
constexpr std::size_t kStaticScalars = 4;  // S0, μ, σ, ΔT_range
}  // namespace

std::string to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::Dense: return "dense";
        case BaselineKind::Conv: return "conv";
        case BaselineKind::Recurrent: return "recurrent";
    }
    return "unknown";
}

BaselineKind baseline_kind_from_string(const std::string& name) {
    if (name == "dense" || name == "mlp") return BaselineKind::Dense;
    if (name == "conv" || name == "cnn") return BaselineKind::Conv;
    if (name == "recurrent" || name == "lstm") return BaselineKind::Recurrent;
    throw ConfigError("baseline: unknown kind '" + name + "'");
}

BaselineModel::BaselineModel(BaselineKind kind, const ExperimentConfig& cfg, std::size_t n_units,
                             std::uint64_t seed)
    : kind_(kind), cfg_(cfg), n_units_(n_units) {
    cfg_.validate();
    ad::Rng rng(seed);
    const auto L = static_cast<std::size_t>(cfg.seq_len);
    const auto H = static_cast<std::size_t>(cfg.rollout_len);
    const auto emb = static_cast<std::size_t>(cfg.id_embed_dim);
    const std::size_t n_static = kStaticScalars + emb;
    id_embed_ = ad::Embedding(n_units, emb, rng);
    switch (kind) {
        case BaselineKind::Dense: {
            const std::size_t in = 3 * L + 2 * H + n_static;
            d1_ = ad::Dense(in, 128, rng);
            d2_ = ad::Dense(128, 64, rng);
            d3_ = ad::Dense(64, H, rng);
            break;
        }
        case BaselineKind::Conv: {
            if ((L + H) % 4 != 0) throw ConfigError("seq_len: conv baseline needs (L+H) % 4 == 0");
            c1_ = ad::Conv1d(kChannels, 16, 3, 1, rng);
            c2_ = ad::Conv1d(16, 32, 3, 1, rng);
            h1_ = ad::Dense(32 * ((L + H) / 4) + n_static, 64, rng);
            h2_ = ad::Dense(64, H, rng);
            break;
        }
        case BaselineKind::Recurrent: {
            cell_ = ad::LstmCell(kChannels, 64, rng);
            h1_ = ad::Dense(64 + n_static, 64, rng);
            h2_ = ad::Dense(64, H, rng);
            break;
        }
    }
}

Value BaselineModel::static_features(const Batch& b) const {
    for (int u : b.units) {
        if (u < 0 || static_cast<std::size_t>(u) >= n_units_) {
            throw LookupError("baseline: unknown unit id " + std::to_string(u));
        }
    }
    return ad::concat_cols({b.S0, b.mu, b.sigma, b.dT_range, id_embed_(b.units)});
}

Value BaselineModel::sequence_channels(const Batch& b) const {
    const std::size_t B = b.size;
    const std::size_t L = b.seq_len;
    const std::size_t H = b.horizon;
    const std::size_t T = L + H;
    ad::Tensor x({B, kChannels, T});
    for (std::size_t i = 0; i < B; ++i) {
        double* row = x.data.data() + i * kChannels * T;
        for (std::size_t t = 0; t < L; ++t) {
            row[0 * T + t] = b.x_env.data()[i * L + t];
            row[1 * T + t] = b.x_tin.data()[i * L + t];
            row[2 * T + t] = b.ctx_p.data()[i * L + t];
        }
        for (std::size_t t = 0; t < H; ++t) {
            row[0 * T + L + t] = b.hz_T_out_std.data()[i * H + t];
            row[2 * T + L + t] = b.hz_p_std.data()[i * H + t];
            row[3 * T + L + t] = 1.0;
        }
    }
    return Value::constant(std::move(x));
}

Value BaselineModel::predict(const Batch& b) const {
    const Value stat = static_features(b);
    switch (kind_) {
        case BaselineKind::Dense: {
            const Value x_env = ad::reshape(b.x_env, {b.size, b.seq_len});
            const Value x = ad::concat_cols({x_env, b.x_tin, b.ctx_p, b.hz_T_out_std, b.hz_p_std, stat});
            return d3_(ad::relu(d2_(ad::relu(d1_(x)))));
        }
        case BaselineKind::Conv: {
            Value h = ad::maxpool1d(ad::relu(c1_(sequence_channels(b))), 2);
            h = ad::maxpool1d(ad::relu(c2_(h)), 2);
            h = ad::reshape(h, {b.size, h.size() / b.size});
            return h2_(ad::relu(h1_(ad::concat_cols({h, stat}))));
        }
        case BaselineKind::Recurrent: {
            const Value channels = sequence_channels(b);
            const ad::Tensor& seq = channels.tensor();
            const std::size_t T = b.seq_len + b.horizon;
            const std::size_t hidden = cell_.hidden();
            Value h = Value::constant(ad::Tensor({b.size, hidden}));
            Value c = Value::constant(ad::Tensor({b.size, hidden}));
            for (std::size_t t = 0; t < T; ++t) {
                std::vector<double> step(b.size * kChannels);
                for (std::size_t i = 0; i < b.size; ++i) {
                    for (std::size_t ch = 0; ch < kChannels; ++ch) {
                        step[i * kChannels + ch] = seq.data[(i * kChannels + ch) * T + t];
                    }
                }
                std::tie(h, c) = cell_(Value::matrix(b.size, kChannels, std::move(step)), h, c);
            }
            return h2_(ad::relu(h1_(ad::concat_cols({h, stat}))));
        }
    }
    throw ConfigError("baseline: unknown kind");
}

Value BaselineModel::training_loss(const Batch& b) const { return ad::mse(predict(b), b.S_true); }

Value BaselineModel::evaluate(const Batch& b) const { return ad::clamp(predict(b), 0.0, 1.0); }

ad::ParamList BaselineModel::parameters() const {
    ad::ParamList p;
    id_embed_.collect("id_embedding", p);
    switch (kind_) {
        case BaselineKind::Dense:
            d1_.collect("dense1", p);
            d2_.collect("dense2", p);
            d3_.collect("dense3", p);
            break;
        case BaselineKind::Conv:
            c1_.collect("conv1", p);
            c2_.collect("conv2", p);
            h1_.collect("head1", p);
            h2_.collect("head2", p);
            break;
        case BaselineKind::Recurrent:
            cell_.collect("lstm", p);
            h1_.collect("head1", p);
            h2_.collect("head2", p);
            break;
    }
    return p;
}

}  // namespace vbnet
