#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "vbnet/data_pipeline.hpp"
#include "vbnet/soc_model.hpp"

namespace vbnet {

struct TrainOptions {
    double lr = 1e-3;
    std::size_t batch_size = 64;
    int epochs = 200;
    int patience = 20;
    double val_frac = 0.1;
    std::uint64_t seed = 7;
    /// Called after every epoch with (epoch, mean training loss, monitored metric).
    std::function<void(int, double, double)> on_epoch;

    static TrainOptions from(const ExperimentConfig& cfg);
};

struct TrainResult {
    int epochs_run = 0;
    int best_epoch = -1;
    double best_monitor = 0.0;
    bool used_validation = false;
    std::vector<double> loss_history;
};

/// Holds out the chronologically last ⌊val_frac·n⌋ samples of every unit that
/// has at least 10 training samples. Returns (fit, validation).
std::pair<std::vector<Sample>, std::vector<Sample>> split_validation(
    const std::vector<Sample>& train, double val_frac);

/// Mini-batch adaptive-moment training with early stopping on validation RMSE
/// (or on training loss when no unit is large enough to hold out data). The
/// best parameters are restored before returning.
TrainResult train_model(SocModel& model, const std::vector<Sample>& train, const NormStats& norm,
                        const TrainOptions& opts);

/// evaluate() outputs per sample, in input order.
std::vector<std::vector<double>> predict_samples(const SocModel& model,
                                                 const std::vector<Sample>& samples,
                                                 const NormStats& norm, std::size_t batch = 256);

}  // namespace vbnet
