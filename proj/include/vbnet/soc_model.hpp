#pragma once

#include <string>

#include "vbnet/ad/layers.hpp"
#include "vbnet/batch.hpp"

namespace vbnet {

/// Anything that maps a batch to a horizon of SOC predictions and can be
/// trained by the shared harness.
class SocModel {
public:
    virtual ~SocModel() = default;

    virtual std::string kind() const = 0;
    /// [B,H] prediction, differentiable with respect to parameters().
    virtual ad::Value predict(const Batch& batch) const = 0;
    /// Scalar objective minimised during training.
    virtual ad::Value training_loss(const Batch& batch) const = 0;
    /// Prediction as reported in metrics (within [0,1]).
    virtual ad::Value evaluate(const Batch& batch) const { return predict(batch); }
    virtual ad::ParamList parameters() const = 0;
};

}  // namespace vbnet
