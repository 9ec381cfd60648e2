#pragma once

#include "deepg2p/dataset.hpp"
#include "deepg2p/metrics.hpp"
#include "deepg2p/model.hpp"
#include "deepg2p/preprocess.hpp"
#include "deepg2p/selection.hpp"
#include "deepg2p/split.hpp"
#include "deepg2p/trainer.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace deepg2p {

struct CrossValConfig {
    ModelConfig model;
    TrainConfig train;
    SelectionConfig selection;
    /// Select SNPs once on every observation instead of per fold.
    bool global_selection = false;
    /// Worker threads for fold-parallel execution (1 = sequential).
    std::size_t threads = 1;
    /// Rotations to run; empty runs all of them.
    std::vector<std::size_t> rotations;
};

/// A trained fold: enough to re-predict any observation of the dataset.
struct FoldModel {
    std::size_t fold = 0;
    Preprocessor preprocessor;
    ModelParams params;

    nlohmann::json to_json() const;
    static FoldModel from_json(const nlohmann::json& doc);
};

struct FoldOutcome {
    FoldModel model;
    FoldMetrics metrics;
    std::optional<SelectionReport> selection;
    std::vector<std::size_t> test_observations;
    std::vector<double> test_predictions; // original units
};

struct CrossValResult {
    MetricReport report;
    std::vector<FoldOutcome> folds; // sorted by fold id
};

/// Observation indices of each role under one rotation.
struct FoldMembers {
    std::vector<std::size_t> train, validation, test;
};
FoldMembers fold_members(const Dataset& data, const SplitPlan& plan, std::size_t rotation);

/// Predictions in original units for the given observations.
std::vector<double> predict_observations(const Dataset& data, const FoldModel& model,
                                         std::span<const std::size_t> observations);

/// Runs each rotation: SNP selection on the training hybrids (per-hybrid mean
/// yield), scalers fit on the training split, training with early stopping on
/// the validation split, metrics on validation and test. Fold k draws from the
/// stream labeled "fold<k>", so results do not depend on scheduling.
CrossValResult cross_validate(const Dataset& data, const SplitPlan& plan, const CrossValConfig& config,
                              std::uint64_t seed);

} // namespace deepg2p
