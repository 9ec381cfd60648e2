#pragma once

#include "deepg2p/tables.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace deepg2p {

/// linear: effects scale with dosage d and summary z. threshold: d is replaced
/// by [d >= 1] and z by max(z, 0).
enum class EffectMode { linear, threshold };

struct SynthConfig {
    std::size_t hybrids = 500;
    std::size_t environments = 20;
    std::size_t snps = 100;
    std::size_t causal = 10;
    std::size_t interactions = 5;
    std::size_t context_flank = 2;
    /// Non-reference allele frequency range.
    double allele_freq_min = 0.1;
    double allele_freq_max = 0.5;
    double mean_yield = 100.0;
    double beta_scale = 1.0;
    double gamma_scale = 1.0;
    double delta_scale = 1.0;
    double sigma = 1.0;
    std::size_t season_days = 215;
    /// Env season lengths are drawn from [season_days - jitter, season_days].
    std::size_t season_jitter = 0;
    /// Days averaged by each interaction's weather summary.
    std::size_t summary_days = 25;
    /// Probability that a (hybrid, env) pair is observed.
    double observed_fraction = 1.0;
    EffectMode mode = EffectMode::linear;
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static SynthConfig from_json(const nlohmann::json& doc, SynthConfig base);
};

struct CausalEffect {
    std::string snp_id;
    double beta = 0.0;
};

/// delta * dosage * z, z the summary of one raw weather channel averaged over
/// [first_day, first_day + days) and standardized with summary_mean/std.
struct InteractionEffect {
    std::string snp_id;
    std::size_t channel = 0; // raw channel index: srad, vp, prcp, tmax, tmin, wind
    std::size_t first_day = 0;
    std::size_t days = 0;
    double delta = 0.0;
    double summary_mean = 0.0;
    double summary_std = 1.0;
};

struct GroundTruth {
    EffectMode mode = EffectMode::linear;
    double mean_yield = 0.0;
    std::vector<CausalEffect> causal;
    std::vector<InteractionEffect> interactions;
    std::vector<double> soil_gamma;
    std::vector<double> management_gamma;

    nlohmann::json to_json() const;
    static GroundTruth from_json(const nlohmann::json& doc);
};

struct SynthData {
    GenotypeTable genotypes;
    std::vector<DailyWeather> weather;
    FeatureTable soil;
    FeatureTable management;
    std::vector<Observation> observations;
    GroundTruth truth;
};

/// Raw-channel mean over a day range (clipped to the available days).
double weather_summary(const DailyWeather& weather, std::size_t channel, std::size_t first_day, std::size_t days);

SynthData generate(const SynthConfig& config);

/// Noise-free yields of the given observations under the ground truth.
std::vector<double> expected_yields(const GroundTruth& truth, const GenotypeTable& genotypes,
                                    const std::vector<DailyWeather>& weather, const FeatureTable& soil,
                                    const FeatureTable& management, const std::vector<Observation>& observations);

/// Writes the five ingest tables and ground_truth.json into dir.
void write_synth(const SynthData& data, const std::filesystem::path& dir);

} // namespace deepg2p
