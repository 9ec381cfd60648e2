#pragma once

#include "deepg2p/adam.hpp"
#include "deepg2p/metrics.hpp"
#include "deepg2p/model.hpp"
#include "deepg2p/preprocess.hpp"
#include "deepg2p/rng.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <vector>

namespace deepg2p {

struct TrainConfig {
    AdamConfig adam;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;

    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& doc, TrainConfig base);
};

struct TrainResult {
    ModelParams params; // restored to the best validation epoch
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_validation_rmse = 0.0;
};

/// Predictions in standardized target units, computed in inference mode.
std::vector<double> predict_rows(const ModelParams& params, const TrainingData& data, std::span<const SampleRow> rows,
                                 std::size_t batch_size = 256);

/// Adam on MSE of the standardized target. Each epoch visits the training
/// rows in a permutation drawn from the epoch's stream; validation RMSE is
/// reported in original units (target_std times the standardized RMSE).
/// Stops after `patience` epochs without improvement and restores the best
/// parameters.
TrainResult train_model(const ModelConfig& config, const TrainingData& data, std::span<const SampleRow> train,
                        std::span<const SampleRow> validation, const TrainConfig& schedule, const RngStream& rng,
                        double target_std = 1.0);

} // namespace deepg2p
