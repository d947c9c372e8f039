#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "vbnet/data_pipeline.hpp"
#include "vbnet/soc_model.hpp"

namespace vbnet {

/// "vbnet" or a baseline name ("dense", "conv", "recurrent").
std::unique_ptr<SocModel> make_model(const std::string& kind, const ExperimentConfig& cfg,
                                     std::size_t n_units, std::uint64_t seed);

struct Checkpoint {
    ExperimentConfig config;
    std::size_t n_units = 0;
    NormStats norm;
    std::unique_ptr<SocModel> model;
};

/// JSON with the model kind, config, unit count, normalisation statistics
/// and every parameter tensor.
void save_checkpoint(const std::filesystem::path& path, const SocModel& model,
                     const ExperimentConfig& cfg, std::size_t n_units, const NormStats& norm);

/// Throws IngestionError on unreadable or inconsistent files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vbnet
