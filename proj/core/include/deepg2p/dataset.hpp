#pragma once

#include "deepg2p/tables.hpp"
#include "deepg2p/weather.hpp"

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace deepg2p {

struct DataPaths {
    std::filesystem::path genotypes;
    std::filesystem::path weather;
    std::filesystem::path soil;
    std::filesystem::path management;
    std::filesystem::path phenotypes;

    /// The five standard file names inside one directory.
    static DataPaths in_directory(const std::filesystem::path& dir);
};

/// The five tables joined and validated. Observations are kept in canonical
/// (env_id, hybrid_id) order so results never depend on input row order.
struct Dataset {
    GenotypeTable genotypes;
    std::vector<WeatherSeries> weather; // sorted by env id
    FeatureTable soil;
    FeatureTable management;
    std::vector<Observation> observations;
    std::size_t resolved_missing_calls = 0;

    std::size_t weather_index(std::string_view env_id) const;
    /// Sorted distinct env ids that carry observations.
    std::vector<std::string> observed_envs() const;
    /// Sorted distinct hybrid ids that carry observations.
    std::vector<std::string> observed_hybrids() const;
};

/// Validates cross references (every observation's hybrid and env resolve,
/// yields finite, duplicate (env, hybrid) pairs rejected), windows the weather
/// and resolves missing genotype calls.
Dataset assemble_dataset(GenotypeTable genotypes, const std::vector<DailyWeather>& weather, FeatureTable soil,
                         FeatureTable management, std::vector<Observation> observations);

Dataset load_dataset(const DataPaths& paths);

} // namespace deepg2p
