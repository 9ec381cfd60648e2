#pragma once

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deepg2p {

double rmse(std::span<const double> prediction, std::span<const double> truth);
/// Sample Pearson correlation; empty when either side is constant.
std::optional<double> pearson(std::span<const double> prediction, std::span<const double> truth);

struct Metrics {
    std::optional<double> pearson;
    double rmse = 0.0;
    std::size_t count = 0;

    nlohmann::json to_json() const;
};

Metrics evaluate(std::span<const double> prediction, std::span<const double> truth);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double validation_rmse = 0.0;
};

struct FoldMetrics {
    std::size_t fold = 0;
    Metrics validation;
    Metrics test;
    std::size_t best_epoch = 0;
    std::vector<EpochRecord> history;
};

struct Summary {
    double mean = 0.0;
    double stddev = 0.0; // sample std across folds
    std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct MetricReport {
    std::string split_mode;
    std::string variant;
    std::vector<FoldMetrics> folds; // sorted by fold id

    Summary test_pearson() const;
    Summary test_rmse() const;
    Summary validation_rmse() const;
    nlohmann::json to_json() const;
    static MetricReport from_json(const nlohmann::json& doc);
    /// fold, split_mode, variant, pearson, rmse (test metrics).
    void write_tsv(std::ostream& out) const;
};

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

} // namespace deepg2p
