#include "vbnet/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace vbnet::ad {

namespace {

struct Probe {
    double value;
    std::uint64_t digest;
};

Probe evaluate(const std::function<Value()>& f) {
    BranchTrace trace;
    const double v = f().item();
    return {v, trace.digest()};
}

}  // namespace

GradCheckResult grad_check(const std::function<Value()>& f, const ParamList& params,
                           const GradCheckOptions& opts) {
    for (const auto& p : params) {
        Value handle = p.value;
        handle.zero_grad();
    }
    std::uint64_t base_digest = 0;
    {
        BranchTrace trace;
        const Value loss = f();
        base_digest = trace.digest();
        loss.backward();
    }
    std::vector<std::vector<double>> analytic;
    for (const auto& p : params) analytic.emplace_back(p.value.grad().begin(), p.value.grad().end());

    std::mt19937_64 rng(opts.seed);
    GradCheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Value param = params[pi].value;
        auto data = param.mutable_data();
        std::vector<std::size_t> coords(data.size());
        std::iota(coords.begin(), coords.end(), 0);
        if (opts.max_coords > 0 && coords.size() > opts.max_coords) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(opts.max_coords);
            std::sort(coords.begin(), coords.end());
        }
        for (std::size_t i : coords) {
            const double orig = data[i];
            const double h = opts.eps;
            Probe probes[4];
            const double offsets[4] = {h, -h, 0.5 * h, -0.5 * h};
            for (int k = 0; k < 4; ++k) {
                data[i] = orig + offsets[k];
                probes[k] = evaluate(f);
            }
            data[i] = orig;
            const bool branch_change = std::any_of(std::begin(probes), std::end(probes),
                                                   [&](const Probe& p) { return p.digest != base_digest; });
            if (opts.skip_branch_changes && branch_change) {
                ++result.skipped;
                continue;
            }
            const double d_full = (probes[0].value - probes[1].value) / (2.0 * h);
            const double d_half = (probes[2].value - probes[3].value) / h;
            const double fd = (4.0 * d_half - d_full) / 3.0;
            const double ad = analytic[pi][i];
            const double err = std::abs(ad - fd) / std::max(1e-8, std::abs(ad) + std::abs(fd));
            if (++result.checked == 1 || err > result.max_rel_error) {
                result.max_rel_error = err;
                result.worst_param = params[pi].name;
                result.worst_index = i;
            }
        }
    }
    return result;
}

}  // namespace vbnet::ad
