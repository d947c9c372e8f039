#include "vbnet/training.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "vbnet/ad/optim.hpp"
#include "vbnet/errors.hpp"

namespace vbnet {

TrainOptions TrainOptions::from(const ExperimentConfig& cfg) {
    TrainOptions o;
    o.lr = cfg.lr;
    o.batch_size = static_cast<std::size_t>(cfg.batch_size);
    o.epochs = cfg.epochs;
    o.patience = cfg.patience;
    o.val_frac = cfg.val_frac;
    o.seed = cfg.seed;
    return o;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_validation(
    const std::vector<Sample>& train, double val_frac) {
    std::map<int, std::size_t> count;
    for (const Sample& s : train) ++count[s.unit_id];
    std::map<int, std::size_t> keep;
    for (const auto& [unit, n] : count) {
        const auto held = n >= 10 ? static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(n)))
                                  : 0;
        keep[unit] = n - held;
    }
    std::vector<Sample> fit, val;
    std::map<int, std::size_t> seen;
    for (const Sample& s : train) {
        (seen[s.unit_id]++ < keep[s.unit_id] ? fit : val).push_back(s);
    }
    return {std::move(fit), std::move(val)};
}

namespace {

double rmse_of(const std::vector<std::vector<double>>& pred, const std::vector<Sample>& truth) {
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t t = 0; t < truth[i].S_true.size(); ++t) {
            const double e = pred[i][t] - truth[i].S_true[t];
            sq += e * e;
            ++n;
        }
    }
    return std::sqrt(sq / static_cast<double>(n));
}

}  // namespace

TrainResult train_model(SocModel& model, const std::vector<Sample>& train, const NormStats& norm,
                        const TrainOptions& opts) {
    if (train.empty()) throw TrainingError("train_model: no training samples");
    auto [fit, val] = split_validation(train, opts.val_frac);

    ad::ParamList params = model.parameters();
    ad::Adam adam(params, opts.lr);
    std::mt19937_64 rng(opts.seed);

    TrainResult result;
    result.used_validation = !val.empty();
    result.best_monitor = std::numeric_limits<double>::infinity();
    auto best = ad::snapshot(params);
    int since_best = 0;

    std::vector<std::size_t> order(fit.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng() % i]);
        }
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += opts.batch_size) {
            const std::size_t end = std::min(order.size(), start + opts.batch_size);
            std::vector<const Sample*> group;
            for (std::size_t k = start; k < end; ++k) group.push_back(&fit[order[k]]);
            const Batch batch = make_batch(std::span<const Sample* const>(group), norm);
            adam.zero_grad();
            const ad::Value loss = model.training_loss(batch);
            if (!std::isfinite(loss.item())) {
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
            }
            loss.backward();
            adam.step();
            loss_sum += loss.item();
            ++batches;
        }
        const double mean_loss = loss_sum / static_cast<double>(batches);
        result.loss_history.push_back(mean_loss);
        const double monitor =
            val.empty() ? mean_loss : rmse_of(predict_samples(model, val, norm), val);
        ++result.epochs_run;
        if (opts.on_epoch) opts.on_epoch(epoch, mean_loss, monitor);
        if (monitor < result.best_monitor) {
            result.best_monitor = monitor;
            result.best_epoch = epoch;
            best = ad::snapshot(params);
            since_best = 0;
        } else if (++since_best >= opts.patience) {
            break;
        }
    }
    if (result.best_epoch >= 0) ad::restore(params, best);
    return result;
}

std::vector<std::vector<double>> predict_samples(const SocModel& model,
                                                 const std::vector<Sample>& samples,
                                                 const NormStats& norm, std::size_t batch) {
    std::vector<std::vector<double>> out;
    out.reserve(samples.size());
    for (std::size_t start = 0; start < samples.size(); start += batch) {
        const std::size_t end = std::min(samples.size(), start + batch);
        std::vector<const Sample*> group;
        for (std::size_t k = start; k < end; ++k) group.push_back(&samples[k]);
        const Batch b = make_batch(std::span<const Sample* const>(group), norm);
        const ad::Value pred = model.evaluate(b);
        const std::size_t H = b.horizon;
        for (std::size_t i = 0; i < group.size(); ++i) {
            out.emplace_back(pred.data().begin() + static_cast<std::ptrdiff_t>(i * H),
                             pred.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * H));
        }
    }
    return out;
}

}  // namespace vbnet
