#include "vbnet/batch.hpp"

#include "vbnet/errors.hpp"

namespace vbnet {

Batch make_batch(std::span<const Sample* const> samples, const NormStats& norm) {
    if (samples.empty()) throw ShapeError("make_batch: no samples");
    const std::size_t B = samples.size();
    const std::size_t L = samples[0]->ctx_T_in.size();
    const std::size_t H = samples[0]->S_true.size();

    std::vector<double> x_env(B * L), x_tin(B * L), ctx_p(B * L);
    std::vector<double> p_last(B), mu(B), sigma(B), dT(B), S0(B), tmin(B), tmax(B), eta(B);
    std::vector<double> hz_T(B * H), hz_p(B * H), hz_T_std(B * H), hz_p_std(B * H), S_true(B * H);

    Batch out;
    out.size = B;
    out.seq_len = L;
    out.horizon = H;
    for (std::size_t b = 0; b < B; ++b) {
        const Sample& s = *samples[b];
        if (s.ctx_T_in.size() != L || s.ctx_T_out.size() != L || s.ctx_P_ac.size() != L ||
            s.S_true.size() != H || s.hz_T_out.size() != H || s.hz_P_ac.size() != H) {
            throw ShapeError("make_batch: samples have inconsistent window lengths");
        }
        out.units.push_back(s.unit_id);
        for (std::size_t t = 0; t < L; ++t) {
            x_env[b * L + t] = norm.apply(Feature::T_out, s.ctx_T_out[t]);
            x_tin[b * L + t] = norm.apply(Feature::T_in, s.ctx_T_in[t]);
            ctx_p[b * L + t] = norm.apply(Feature::P_ac, s.ctx_P_ac[t]);
        }
        p_last[b] = norm.apply(Feature::P_ac, s.ctx_P_ac.back());
        mu[b] = norm.apply(Feature::mu_Tin, s.mu_Tin);
        sigma[b] = norm.apply(Feature::sigma_Tin, s.sigma_Tin);
        dT[b] = norm.apply(Feature::dT_range, s.dT_range());
        for (std::size_t t = 0; t < H; ++t) {
            hz_T[b * H + t] = s.hz_T_out[t];
            hz_p[b * H + t] = s.hz_P_ac[t];
            hz_T_std[b * H + t] = norm.apply(Feature::T_out, s.hz_T_out[t]);
            hz_p_std[b * H + t] = norm.apply(Feature::P_ac, s.hz_P_ac[t]);
            S_true[b * H + t] = s.S_true[t];
        }
        S0[b] = s.S0;
        tmin[b] = s.T_min;
        tmax[b] = s.T_max;
        eta[b] = s.eta;
    }
    using ad::Tensor;
    using ad::Value;
    out.x_env = Value::constant(Tensor({B, 1, L}, std::move(x_env)));
    out.x_tin = Value::matrix(B, L, std::move(x_tin));
    out.ctx_p = Value::matrix(B, L, std::move(ctx_p));
    out.p_last = Value::matrix(B, 1, std::move(p_last));
    out.mu = Value::matrix(B, 1, std::move(mu));
    out.sigma = Value::matrix(B, 1, std::move(sigma));
    out.dT_range = Value::matrix(B, 1, std::move(dT));
    out.hz_T_out_std = Value::matrix(B, H, std::move(hz_T_std));
    out.hz_p_std = Value::matrix(B, H, std::move(hz_p_std));
    out.S0 = Value::matrix(B, 1, std::move(S0));
    out.hz_T_out = Value::matrix(B, H, std::move(hz_T));
    out.hz_p = Value::matrix(B, H, std::move(hz_p));
    out.T_min = Value::matrix(B, 1, std::move(tmin));
    out.T_max = Value::matrix(B, 1, std::move(tmax));
    out.eta = Value::matrix(B, 1, std::move(eta));
    out.S_true = Value::matrix(B, H, std::move(S_true));
    return out;
}

Batch make_batch(const std::vector<Sample>& samples, const NormStats& norm) {
    std::vector<const Sample*> ptrs;
    ptrs.reserve(samples.size());
    for (const Sample& s : samples) ptrs.push_back(&s);
    return make_batch(std::span<const Sample* const>(ptrs), norm);
}

}  // namespace vbnet
