#include "deepg2p/dataset.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace deepg2p {

DataPaths DataPaths::in_directory(const std::filesystem::path& dir)
{
    return {dir / "genotypes.tsv", dir / "weather.tsv", dir / "soil.tsv", dir / "management.tsv",
            dir / "phenotypes.tsv"};
}

std::size_t Dataset::weather_index(std::string_view env_id) const
{
    auto it = std::lower_bound(weather.begin(), weather.end(), env_id,
                               [](const WeatherSeries& w, std::string_view id) { return w.env_id < id; });
    if (it == weather.end() || it->env_id != env_id)
        throw DataError("no weather for environment '" + std::string(env_id) + "'");
    return static_cast<std::size_t>(it - weather.begin());
}

std::vector<std::string> Dataset::observed_envs() const
{
    std::set<std::string> ids;
    for (const auto& o : observations)
        ids.insert(o.env_id);
    return {ids.begin(), ids.end()};
}

std::vector<std::string> Dataset::observed_hybrids() const
{
    std::set<std::string> ids;
    for (const auto& o : observations)
        ids.insert(o.hybrid_id);
    return {ids.begin(), ids.end()};
}

Dataset assemble_dataset(GenotypeTable genotypes, const std::vector<DailyWeather>& weather, FeatureTable soil,
                         FeatureTable management, std::vector<Observation> observations)
{
    genotypes.validate();
    if (observations.empty())
        throw DataError("phenotypes: no observations");

    Dataset data;
    data.resolved_missing_calls = resolve_missing_calls(genotypes);
    data.genotypes = std::move(genotypes);
    for (const auto& w : weather)
        data.weather.push_back(window_and_pad(w));
    std::sort(data.weather.begin(), data.weather.end(),
              [](const WeatherSeries& a, const WeatherSeries& b) { return a.env_id < b.env_id; });
    for (std::size_t i = 1; i < data.weather.size(); ++i)
        if (data.weather[i].env_id == data.weather[i - 1].env_id)
            throw DataError("weather: environment '" + data.weather[i].env_id + "' appears twice");
    data.soil = std::move(soil);
    data.management = std::move(management);

    std::sort(observations.begin(), observations.end(), [](const Observation& a, const Observation& b) {
        return std::tie(a.env_id, a.hybrid_id) < std::tie(b.env_id, b.hybrid_id);
    });
    const auto hybrids = make_index(data.genotypes.hybrids);
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const Observation& o = observations[i];
        if (i > 0 && o.env_id == observations[i - 1].env_id && o.hybrid_id == observations[i - 1].hybrid_id)
            throw DataError("phenotypes: duplicate observation for hybrid '" + o.hybrid_id + "' in '" + o.env_id + "'");
        if (!std::isfinite(o.yield))
            throw DataError("phenotypes: non-finite yield for hybrid '" + o.hybrid_id + "' in '" + o.env_id + "'");
        if (!hybrids.contains(o.hybrid_id))
            throw DataError("phenotypes: hybrid '" + o.hybrid_id + "' is not in the genotype table");
        split_env_id(o.env_id);
        data.weather_index(o.env_id);
        if (!data.soil.contains(o.env_id))
            throw DataError("phenotypes: environment '" + o.env_id + "' has no soil record");
        if (!data.management.contains(o.env_id))
            throw DataError("phenotypes: environment '" + o.env_id + "' has no management record");
    }
    data.observations = std::move(observations);
    return data;
}

Dataset load_dataset(const DataPaths& paths)
{
    return assemble_dataset(parse_genotypes(paths.genotypes), parse_weather_daily(paths.weather),
                            parse_soil(paths.soil), parse_management(paths.management),
                            parse_phenotypes(paths.phenotypes));
}

} // namespace deepg2p
