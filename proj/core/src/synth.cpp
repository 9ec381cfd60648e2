#include "deepg2p/synth.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/rng.hpp"
#include "deepg2p/selection.hpp"
#include "deepg2p/tsv.hpp"
#include "deepg2p/weather.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

namespace deepg2p {

namespace {

constexpr std::string_view kBasesText = "ACGT";
constexpr std::size_t kRawChannels = 6;
constexpr std::size_t kYearsPerLocation = 5;
constexpr int kFirstYear = 2014;

const std::vector<std::string> kManagementNames{"irrigation", "nitrogen", "phosphorus", "potassium", "plant_density"};

char iupac_pair(char a, char b)
{
    if (a > b)
        std::swap(a, b);
    if (a == b)
        return a;
    if (a == 'A' && b == 'G') return 'R';
    if (a == 'C' && b == 'T') return 'Y';
    if (a == 'C' && b == 'G') return 'S';
    if (a == 'A' && b == 'T') return 'W';
    if (a == 'G' && b == 'T') return 'K';
    return 'M'; // A/C
}

std::string padded(std::size_t value, std::size_t width)
{
    std::string s = std::to_string(value);
    if (s.size() < width)
        s.insert(0, width - s.size(), '0');
    return s;
}

std::string format_date(int year, std::size_t day_offset)
{
    using namespace std::chrono;
    const sys_days start = std::chrono::year{year} / May / 1;
    const year_month_day d{start + days{static_cast<int>(day_offset)}};
    return std::to_string(static_cast<int>(d.year())) + "-" + padded(static_cast<unsigned>(d.month()), 2) + "-" +
           padded(static_cast<unsigned>(d.day()), 2);
}

double raw_channel(const DailyRecord& day, std::size_t channel)
{
    switch (channel) {
    case 0: return day.srad;
    case 1: return day.vp;
    case 2: return day.prcp;
    case 3: return day.tmax;
    case 4: return day.tmin;
    case 5: return day.wind;
    }
    throw ConfigError("raw weather channel " + std::to_string(channel) + " out of range");
}

double effect_dosage(EffectMode mode, int dosage)
{
    return mode == EffectMode::threshold ? (dosage >= 1 ? 1.0 : 0.0) : static_cast<double>(dosage);
}

double effect_summary(EffectMode mode, double z)
{
    return mode == EffectMode::threshold ? std::max(z, 0.0) : z;
}

DailyWeather simulate_season(const std::string& env_id, int year, std::size_t days, const RngStream& location,
                             const RngStream& season)
{
    RngStream loc = location;
    RngStream rng = season;
    // Location climate, shared across its years, plus a per-year anomaly.
    const double srad_base = 200.0 + 30.0 * loc.normal() + 10.0 * rng.normal();
    const double vp_base = 1500.0 + 300.0 * loc.normal() + 100.0 * rng.normal();
    const double prcp_base = 3.0 + 1.0 * loc.normal() + 0.5 * rng.normal();
    const double temp_base = 22.0 + 3.0 * loc.normal() + 1.5 * rng.normal();
    const double wind_base = 3.0 + 0.8 * loc.normal() + 0.3 * rng.normal();
    const double phase = 0.3 * rng.normal();

    DailyWeather w;
    w.env_id = env_id;
    for (std::size_t d = 0; d < days; ++d) {
        const double season_wave = std::sin(std::numbers::pi * static_cast<double>(d) / 215.0 + phase);
        DailyRecord r;
        r.date = format_date(year, d);
        r.srad = std::max(5.0, srad_base + 80.0 * season_wave + 40.0 * rng.normal());
        r.vp = std::max(100.0, vp_base + 600.0 * season_wave + 200.0 * rng.normal());
        r.prcp = std::max(0.0, prcp_base + 6.0 * rng.normal());
        r.tmax = temp_base + 6.0 + 8.0 * season_wave + 3.0 * rng.normal();
        r.tmin = r.tmax - (8.0 + 2.0 * std::abs(rng.normal()));
        r.wind = std::max(0.1, wind_base + 1.0 * rng.normal());
        derive_weather(r);
        w.days.push_back(std::move(r));
    }
    return w;
}

} // namespace

void SynthConfig::validate() const
{
    if (hybrids < 2 || environments < 1 || snps < 1)
        throw ConfigError("simulate: need at least 2 hybrids, 1 environment and 1 SNP");
    if (causal > snps)
        throw ConfigError("simulate: causal count exceeds the SNP count");
    if (interactions > causal)
        throw ConfigError("simulate: interaction count exceeds the causal count");
    if (!(allele_freq_min > 0.0 && allele_freq_min <= allele_freq_max && allele_freq_max < 1.0))
        throw ConfigError("simulate: allele frequency range must satisfy 0 < min <= max < 1");
    if (!(sigma >= 0.0))
        throw ConfigError("simulate: sigma must be nonnegative");
    if (season_days == 0 || season_jitter >= season_days)
        throw ConfigError("simulate: season_jitter must be smaller than season_days");
    if (summary_days == 0 || summary_days > season_days - season_jitter)
        throw ConfigError("simulate: summary_days must fit in the shortest season");
    if (!(observed_fraction > 0.0 && observed_fraction <= 1.0))
        throw ConfigError("simulate: observed_fraction must lie in (0, 1]");
    if (environments > 900)
        throw ConfigError("simulate: at most 900 environments");
}

nlohmann::json SynthConfig::to_json() const
{
    return {{"hybrids", hybrids},
            {"environments", environments},
            {"snps", snps},
            {"causal", causal},
            {"interactions", interactions},
            {"context_flank", context_flank},
            {"allele_freq_min", allele_freq_min},
            {"allele_freq_max", allele_freq_max},
            {"mean_yield", mean_yield},
            {"beta_scale", beta_scale},
            {"gamma_scale", gamma_scale},
            {"delta_scale", delta_scale},
            {"sigma", sigma},
            {"season_days", season_days},
            {"season_jitter", season_jitter},
            {"summary_days", summary_days},
            {"observed_fraction", observed_fraction},
            {"mode", mode == EffectMode::linear ? "linear" : "threshold"},
            {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& doc, SynthConfig c)
{
    if (!doc.is_object())
        throw ConfigError("simulate: config must be an object");
    for (const auto& [key, v] : doc.items()) {
        try {
            if (key == "hybrids") c.hybrids = v.get<std::size_t>();
            else if (key == "environments") c.environments = v.get<std::size_t>();
            else if (key == "snps") c.snps = v.get<std::size_t>();
            else if (key == "causal") c.causal = v.get<std::size_t>();
            else if (key == "interactions") c.interactions = v.get<std::size_t>();
            else if (key == "context_flank") c.context_flank = v.get<std::size_t>();
            else if (key == "allele_freq_min") c.allele_freq_min = v.get<double>();
            else if (key == "allele_freq_max") c.allele_freq_max = v.get<double>();
            else if (key == "mean_yield") c.mean_yield = v.get<double>();
            else if (key == "beta_scale") c.beta_scale = v.get<double>();
            else if (key == "gamma_scale") c.gamma_scale = v.get<double>();
            else if (key == "delta_scale") c.delta_scale = v.get<double>();
            else if (key == "sigma") c.sigma = v.get<double>();
            else if (key == "season_days") c.season_days = v.get<std::size_t>();
            else if (key == "season_jitter") c.season_jitter = v.get<std::size_t>();
            else if (key == "summary_days") c.summary_days = v.get<std::size_t>();
            else if (key == "observed_fraction") c.observed_fraction = v.get<double>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "mode") {
                const auto m = v.get<std::string>();
                if (m == "linear") c.mode = EffectMode::linear;
                else if (m == "threshold") c.mode = EffectMode::threshold;
                else throw ConfigError("simulate.mode: expected linear or threshold");
            } else
                throw ConfigError("simulate." + key + ": unknown field");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("simulate." + key + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

nlohmann::json GroundTruth::to_json() const
{
    nlohmann::json doc;
    doc["mode"] = mode == EffectMode::linear ? "linear" : "threshold";
    doc["mean_yield"] = mean_yield;
    doc["causal"] = nlohmann::json::array();
    for (const auto& c : causal)
        doc["causal"].push_back({{"snp_id", c.snp_id}, {"beta", c.beta}});
    doc["interactions"] = nlohmann::json::array();
    for (const auto& i : interactions)
        doc["interactions"].push_back({{"snp_id", i.snp_id},
                                       {"channel", std::string(kWeatherChannelNames[i.channel])},
                                       {"channel_index", i.channel},
                                       {"first_day", i.first_day},
                                       {"days", i.days},
                                       {"delta", i.delta},
                                       {"summary_mean", i.summary_mean},
                                       {"summary_std", i.summary_std}});
    doc["soil_gamma"] = soil_gamma;
    doc["management_gamma"] = management_gamma;
    return doc;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& doc)
{
    GroundTruth t;
    try {
        t.mode = doc.at("mode").get<std::string>() == "threshold" ? EffectMode::threshold : EffectMode::linear;
        t.mean_yield = doc.at("mean_yield").get<double>();
        for (const auto& c : doc.at("causal"))
            t.causal.push_back({c.at("snp_id").get<std::string>(), c.at("beta").get<double>()});
        for (const auto& i : doc.at("interactions"))
            t.interactions.push_back({i.at("snp_id").get<std::string>(), i.at("channel_index").get<std::size_t>(),
                                      i.at("first_day").get<std::size_t>(), i.at("days").get<std::size_t>(),
                                      i.at("delta").get<double>(), i.at("summary_mean").get<double>(),
                                      i.at("summary_std").get<double>()});
        t.soil_gamma = doc.at("soil_gamma").get<std::vector<double>>();
        t.management_gamma = doc.at("management_gamma").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed ground truth: ") + e.what());
    }
    return t;
}

double weather_summary(const DailyWeather& weather, std::size_t channel, std::size_t first_day, std::size_t days)
{
    const std::size_t end = std::min(weather.days.size(), first_day + days);
    if (first_day >= end)
        throw DataError("weather summary window starts after the season of '" + weather.env_id + "'");
    double s = 0.0;
    for (std::size_t d = first_day; d < end; ++d)
        s += raw_channel(weather.days[d], channel);
    return s / static_cast<double>(end - first_day);
}

SynthData generate(const SynthConfig& config)
{
    config.validate();
    const RngStream root(config.seed, "synth");
    SynthData out;
    const std::size_t width = 2 * config.context_flank + 1;

    // SNP descriptors and genotypes.
    RngStream snp_rng = root.fork("snps");
    std::set<std::pair<int, std::int64_t>> sites;
    std::vector<double> alt_freq(config.snps);
    std::vector<char> alt_base(config.snps);
    for (std::size_t s = 0; s < config.snps; ++s) {
        SnpDescriptor d;
        d.id = "snp_" + padded(s + 1, 5);
        do {
            d.chromosome = static_cast<int>(snp_rng.below(kMaizeChromosomes)) + 1;
            d.position = static_cast<std::int64_t>(snp_rng.below(300'000'000)) + 1;
        } while (!sites.insert({d.chromosome, d.position}).second);
        for (std::size_t k = 0; k < width; ++k)
            d.context.push_back(kBasesText[snp_rng.below(4)]);
        const char ref = d.reference_base();
        do
            alt_base[s] = kBasesText[snp_rng.below(4)];
        while (alt_base[s] == ref);
        alt_freq[s] = snp_rng.uniform(config.allele_freq_min, config.allele_freq_max);
        out.genotypes.snps.push_back(std::move(d));
    }
    RngStream geno_rng = root.fork("genotypes");
    out.genotypes.calls.resize(config.hybrids * config.snps);
    for (std::size_t h = 0; h < config.hybrids; ++h) {
        out.genotypes.hybrids.push_back("H" + padded(h + 1, 5));
        for (std::size_t s = 0; s < config.snps; ++s) {
            const char ref = out.genotypes.snps[s].reference_base();
            const char a1 = geno_rng.uniform() < alt_freq[s] ? alt_base[s] : ref;
            const char a2 = geno_rng.uniform() < alt_freq[s] ? alt_base[s] : ref;
            out.genotypes.calls[h * config.snps + s] = iupac_pair(a1, a2);
        }
    }

    // Environments.
    const RngStream weather_rng = root.fork("weather");
    RngStream length_rng = root.fork("season_length");
    RngStream env_rng = root.fork("environment");
    std::vector<std::string> env_ids;
    out.soil.feature_names.clear();
    for (std::size_t j = 0; j < kSoilFeatures; ++j)
        out.soil.feature_names.push_back("soil_" + padded(j + 1, 2));
    out.management.feature_names = kManagementNames;
    for (std::size_t e = 0; e < config.environments; ++e) {
        const std::size_t loc = e / kYearsPerLocation;
        const int year = kFirstYear + static_cast<int>(e % kYearsPerLocation);
        const std::string id = "LOC" + padded(loc + 1, 3) + "_" + std::to_string(year);
        env_ids.push_back(id);
        const std::size_t days = config.season_days - length_rng.below(config.season_jitter + 1);
        out.weather.push_back(simulate_season(id, year, days, weather_rng.fork("location" + std::to_string(loc)),
                                              weather_rng.fork(id)));
        std::vector<double> soil(kSoilFeatures), mgmt(kManagementFeatures);
        for (double& v : soil)
            v = env_rng.normal();
        for (double& v : mgmt)
            v = env_rng.normal();
        out.soil.env_ids.push_back(id);
        out.soil.rows.push_back(std::move(soil));
        out.management.env_ids.push_back(id);
        out.management.rows.push_back(std::move(mgmt));
    }

    // Effects.
    RngStream effect_rng = root.fork("effects");
    GroundTruth& truth = out.truth;
    truth.mode = config.mode;
    truth.mean_yield = config.mean_yield;
    std::vector<std::size_t> snp_order(config.snps);
    std::iota(snp_order.begin(), snp_order.end(), std::size_t{0});
    effect_rng.shuffle(std::span<std::size_t>(snp_order));
    auto signed_scale = [&](double scale) {
        const double magnitude = scale * effect_rng.uniform(0.5, 1.5);
        return effect_rng.bernoulli(0.5) ? magnitude : -magnitude;
    };
    for (std::size_t c = 0; c < config.causal; ++c)
        truth.causal.push_back({out.genotypes.snps[snp_order[c]].id, signed_scale(config.beta_scale)});
    const std::size_t shortest = config.season_days - config.season_jitter;
    for (std::size_t i = 0; i < config.interactions; ++i) {
        InteractionEffect ie;
        ie.snp_id = truth.causal[i].snp_id;
        ie.channel = effect_rng.below(kRawChannels);
        ie.days = config.summary_days;
        ie.first_day = effect_rng.below(shortest - config.summary_days + 1);
        ie.delta = signed_scale(config.delta_scale);
        std::vector<double> summaries;
        for (const auto& w : out.weather)
            summaries.push_back(weather_summary(w, ie.channel, ie.first_day, ie.days));
        double mean = 0.0, var = 0.0;
        for (double v : summaries)
            mean += v;
        mean /= static_cast<double>(summaries.size());
        for (double v : summaries)
            var += (v - mean) * (v - mean);
        var /= static_cast<double>(summaries.size());
        ie.summary_mean = mean;
        ie.summary_std = var > 0.0 ? std::sqrt(var) : 1.0;
        truth.interactions.push_back(std::move(ie));
    }
    for (std::size_t j = 0; j < kSoilFeatures; ++j)
        truth.soil_gamma.push_back(config.gamma_scale * effect_rng.normal() / std::sqrt(double(kSoilFeatures)));
    for (std::size_t j = 0; j < kManagementFeatures; ++j)
        truth.management_gamma.push_back(config.gamma_scale * effect_rng.normal() /
                                         std::sqrt(double(kManagementFeatures)));

    // Observations.
    RngStream keep_rng = root.fork("observed");
    for (std::size_t e = 0; e < config.environments; ++e)
        for (std::size_t h = 0; h < config.hybrids; ++h)
            if (config.observed_fraction >= 1.0 || keep_rng.uniform() < config.observed_fraction)
                out.observations.push_back({out.genotypes.hybrids[h], env_ids[e], 0.0});
    const auto expected =
        expected_yields(truth, out.genotypes, out.weather, out.soil, out.management, out.observations);
    RngStream noise_rng = root.fork("noise");
    for (std::size_t i = 0; i < out.observations.size(); ++i)
        out.observations[i].yield = expected[i] + (config.sigma > 0.0 ? config.sigma * noise_rng.normal() : 0.0);
    return out;
}

std::vector<double> expected_yields(const GroundTruth& truth, const GenotypeTable& genotypes,
                                    const std::vector<DailyWeather>& weather, const FeatureTable& soil,
                                    const FeatureTable& management, const std::vector<Observation>& observations)
{
    if (soil.feature_names.size() != truth.soil_gamma.size() ||
        management.feature_names.size() != truth.management_gamma.size())
        throw DataError("ground truth does not match the feature table widths");
    const auto hybrid_index = make_index(genotypes.hybrids);
    std::unordered_map<std::string, std::size_t> weather_index;
    for (std::size_t i = 0; i < weather.size(); ++i)
        weather_index.emplace(weather[i].env_id, i);

    std::vector<std::size_t> causal_cols, inter_cols;
    for (const auto& c : truth.causal)
        causal_cols.push_back(genotypes.snp_index(c.snp_id));
    for (const auto& i : truth.interactions)
        inter_cols.push_back(genotypes.snp_index(i.snp_id));

    // Environment part and standardized summaries per env, cached.
    std::unordered_map<std::string, std::pair<double, std::vector<double>>> env_cache;
    auto env_terms = [&](const std::string& env) -> const std::pair<double, std::vector<double>>& {
        auto it = env_cache.find(env);
        if (it != env_cache.end())
            return it->second;
        double base = truth.mean_yield;
        const auto& s = soil.rows[soil.index(env)];
        const auto& m = management.rows[management.index(env)];
        for (std::size_t j = 0; j < s.size(); ++j)
            base += truth.soil_gamma[j] * s[j];
        for (std::size_t j = 0; j < m.size(); ++j)
            base += truth.management_gamma[j] * m[j];
        std::vector<double> z;
        const auto w = weather_index.find(env);
        if (w == weather_index.end())
            throw DataError("no weather for environment '" + env + "'");
        for (const auto& ie : truth.interactions) {
            const double summary = weather_summary(weather[w->second], ie.channel, ie.first_day, ie.days);
            z.push_back(effect_summary(truth.mode, (summary - ie.summary_mean) / ie.summary_std));
        }
        return env_cache.emplace(env, std::make_pair(base, std::move(z))).first->second;
    };

    std::vector<double> out;
    out.reserve(observations.size());
    for (const auto& o : observations) {
        const std::size_t h = hybrid_index.at(o.hybrid_id);
        const auto& [base, z] = env_terms(o.env_id);
        double y = base;
        for (std::size_t c = 0; c < causal_cols.size(); ++c) {
            const std::size_t col = causal_cols[c];
            y += truth.causal[c].beta *
                 effect_dosage(truth.mode, snp_dosage(genotypes.call(h, col), genotypes.snps[col].reference_base()));
        }
        for (std::size_t i = 0; i < inter_cols.size(); ++i) {
            const std::size_t col = inter_cols[i];
            y += truth.interactions[i].delta *
                 effect_dosage(truth.mode, snp_dosage(genotypes.call(h, col), genotypes.snps[col].reference_base())) *
                 z[i];
        }
        out.push_back(y);
    }
    return out;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f)
            throw DataError("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("genotypes.tsv");
        write_genotypes(f, data.genotypes);
    }
    {
        auto f = open("weather.tsv");
        write_weather_daily(f, data.weather);
    }
    {
        auto f = open("soil.tsv");
        write_features(f, data.soil);
    }
    {
        auto f = open("management.tsv");
        write_features(f, data.management);
    }
    {
        auto f = open("phenotypes.tsv");
        write_phenotypes(f, data.observations);
    }
    auto f = open("ground_truth.json");
    f << data.truth.to_json().dump(2) << '\n';
}

} // namespace deepg2p
