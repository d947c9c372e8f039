#pragma once

#include <span>
#include <vector>

#include "vbnet/ad/value.hpp"
#include "vbnet/data_pipeline.hpp"

namespace vbnet {

/// Model-ready tensors for a group of samples. Every field is derived from
/// Sample, which carries no indoor temperature over the horizon.
struct Batch {
    std::size_t size = 0;
    std::size_t seq_len = 0;
    std::size_t horizon = 0;
    std::vector<int> units;

    // standardised inputs
    ad::Value x_env;        ///< [B,1,L] context T_out
    ad::Value x_tin;        ///< [B,L] context T_in
    ad::Value ctx_p;        ///< [B,L] context P_ac
    ad::Value p_last;       ///< [B,1] P_ac at the last context step
    ad::Value mu;           ///< [B,1]
    ad::Value sigma;        ///< [B,1]
    ad::Value dT_range;     ///< [B,1]
    ad::Value hz_T_out_std; ///< [B,H]
    ad::Value hz_p_std;     ///< [B,H]

    // physical quantities, raw units
    ad::Value S0;           ///< [B,1]
    ad::Value hz_T_out;     ///< [B,H] °C
    ad::Value hz_p;         ///< [B,H] kW
    ad::Value T_min;        ///< [B,1]
    ad::Value T_max;        ///< [B,1]
    ad::Value eta;          ///< [B,1]

    ad::Value S_true;       ///< [B,H] targets only
};

Batch make_batch(std::span<const Sample* const> samples, const NormStats& norm);
Batch make_batch(const std::vector<Sample>& samples, const NormStats& norm);

}  // namespace vbnet
