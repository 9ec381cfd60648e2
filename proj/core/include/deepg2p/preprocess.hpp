#pragma once

#include "deepg2p/dataset.hpp"
#include "deepg2p/model.hpp"
#include "deepg2p/scaler.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

namespace deepg2p {

/// One observation as model input indices plus its standardized target.
struct SampleRow {
    std::size_t hybrid = 0; // genotype table row
    std::size_t env = 0;    // Dataset::weather index
    double target = 0.0;
};

/// Encoded, scaled inputs for every hybrid and environment of a dataset.
struct TrainingData {
    Tensor hybrid_snps; // H x S x 4 x W (empty for the no_g variant)
    Tensor positional;  // S x d
    Tensor env_weather; // E x C x T
    Tensor env_soil;    // E x soil features
    Tensor env_management;

    ModelInputs gather(std::span<const SampleRow> rows) const;
};

/// Everything fit on a training split: the modeling SNP set and the scalers.
/// Missing soil and management cells are imputed with the training mean.
struct Preprocessor {
    std::string fit_set_id;
    std::vector<std::string> snp_ids;
    StandardScaler weather;
    StandardScaler soil;
    StandardScaler management;
    StandardScaler target;
    std::size_t imputed_cells = 0;

    static Preprocessor fit(const Dataset& data, std::span<const std::size_t> train_observations,
                            std::vector<std::string> snp_ids, std::string fit_set_id);

    TrainingData encode(const Dataset& data, const ModelConfig& config) const;
    std::vector<SampleRow> rows(const Dataset& data, std::span<const std::size_t> observations) const;

    nlohmann::json to_json() const;
    static Preprocessor from_json(const nlohmann::json& doc);
};

/// Mean yield per hybrid over the given observations; hybrids in genotype order.
void hybrid_mean_yields(const Dataset& data, std::span<const std::size_t> observations,
                        std::vector<std::size_t>& hybrid_rows, std::vector<double>& means);

} // namespace deepg2p
