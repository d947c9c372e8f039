#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "vbnet/ad/layers.hpp"

namespace vbnet::ad {

struct GradCheckOptions {
    /// Outer step h; the reference combines central differences at h and h/2
    /// (Richardson extrapolation, O(h⁴) truncation error).
    double eps = 1e-3;
    /// Coordinates probed per parameter; 0 probes every coordinate.
    std::size_t max_coords = 0;
    std::uint64_t seed = 0;
    /// Drop coordinates whose probes switch a relu/clamp/max-pool branch;
    /// the function is not differentiable along them at this resolution.
    bool skip_branch_changes = true;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
};

/// Finite-difference check of the reverse-mode gradient of the scalar graph
/// built by `f` with respect to `params`. Per coordinate the error is
/// |g_ad − g_fd| / max(1e-8, |g_ad| + |g_fd|); the maximum is returned.
GradCheckResult grad_check(const std::function<Value()>& f, const ParamList& params,
                           const GradCheckOptions& opts = {});

}  // namespace vbnet::ad
