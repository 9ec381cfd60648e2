#include "deepg2p/preprocess.hpp"

#include "deepg2p/encode.hpp"
#include "deepg2p/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace deepg2p {

namespace {

std::vector<std::string> string_names(const auto& names)
{
    return {names.begin(), names.end()};
}

/// Column means over the non-missing cells of the given feature rows.
std::vector<double> observed_means(const FeatureTable& table, const std::vector<std::size_t>& rows, const char* what)
{
    const std::size_t f = table.feature_names.size();
    std::vector<double> sum(f, 0.0);
    std::vector<std::size_t> count(f, 0);
    for (std::size_t r : rows)
        for (std::size_t j = 0; j < f; ++j)
            if (!std::isnan(table.rows[r][j])) {
                sum[j] += table.rows[r][j];
                ++count[j];
            }
    for (std::size_t j = 0; j < f; ++j) {
        if (count[j] == 0)
            throw DataError(std::string(what) + " feature '" + table.feature_names[j] +
                            "' is missing for every training environment");
        sum[j] /= static_cast<double>(count[j]);
    }
    return sum;
}

Tensor imputed_rows(const FeatureTable& table, const std::vector<std::size_t>& rows, const std::vector<double>& means,
                    std::size_t* imputed)
{
    const std::size_t f = table.feature_names.size();
    Tensor out({rows.size(), f});
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < f; ++j) {
            double v = table.rows[rows[i]][j];
            if (std::isnan(v)) {
                v = means[j];
                if (imputed)
                    ++*imputed;
            }
            out.at(i, j) = v;
        }
    return out;
}

std::vector<std::size_t> feature_rows(const FeatureTable& table, const std::vector<std::string>& envs)
{
    std::vector<std::size_t> rows;
    for (const auto& e : envs)
        rows.push_back(table.index(e));
    return rows;
}

} // namespace

ModelInputs TrainingData::gather(std::span<const SampleRow> rows) const
{
    const std::size_t b = rows.size();
    ModelInputs in;
    const std::size_t c = env_weather.dim(1), t = env_weather.dim(2);
    std::vector<std::size_t> envs;
    std::vector<std::size_t> slot(env_weather.dim(0), b);
    for (const auto& r : rows) {
        if (slot[r.env] == b) {
            slot[r.env] = envs.size();
            envs.push_back(r.env);
        }
        in.weather_rows.push_back(slot[r.env]);
    }
    in.weather = Tensor({envs.size(), c, t});
    in.soil = Tensor({b, env_soil.dim(1)});
    in.management = Tensor({b, env_management.dim(1)});
    auto copy = [](const Tensor& src, std::size_t row, Tensor& dst, std::size_t at) {
        const std::size_t w = src.size() / src.dim(0);
        std::copy_n(src.data().begin() + static_cast<std::ptrdiff_t>(row * w), w,
                    dst.data().begin() + static_cast<std::ptrdiff_t>(at * w));
    };
    for (std::size_t i = 0; i < b; ++i) {
        copy(env_soil, rows[i].env, in.soil, i);
        copy(env_management, rows[i].env, in.management, i);
    }
    for (std::size_t u = 0; u < envs.size(); ++u)
        copy(env_weather, envs[u], in.weather, u);
    if (!hybrid_snps.empty()) {
        Shape shape = hybrid_snps.shape();
        shape[0] = b;
        in.snps = Tensor(shape);
        for (std::size_t i = 0; i < b; ++i)
            copy(hybrid_snps, rows[i].hybrid, in.snps, i);
        in.positional = positional;
    }
    return in;
}

void hybrid_mean_yields(const Dataset& data, std::span<const std::size_t> observations,
                        std::vector<std::size_t>& hybrid_rows, std::vector<double>& means)
{
    std::map<std::size_t, std::pair<double, std::size_t>> acc;
    const auto index = make_index(data.genotypes.hybrids);
    for (std::size_t o : observations) {
        auto& slot = acc[index.at(data.observations[o].hybrid_id)];
        slot.first += data.observations[o].yield;
        slot.second += 1;
    }
    hybrid_rows.clear();
    means.clear();
    for (const auto& [row, s] : acc) {
        hybrid_rows.push_back(row);
        means.push_back(s.first / static_cast<double>(s.second));
    }
}

Preprocessor Preprocessor::fit(const Dataset& data, std::span<const std::size_t> train_observations,
                               std::vector<std::string> snp_ids, std::string fit_set_id)
{
    if (train_observations.empty())
        throw DataError("cannot fit preprocessing on an empty training set");
    Preprocessor p;
    p.fit_set_id = std::move(fit_set_id);
    p.snp_ids = std::move(snp_ids);

    std::set<std::string> env_set;
    Tensor y({train_observations.size(), 1});
    for (std::size_t i = 0; i < train_observations.size(); ++i) {
        const Observation& o = data.observations[train_observations[i]];
        env_set.insert(o.env_id);
        y.at(i, 0) = o.yield;
    }
    const std::vector<std::string> envs(env_set.begin(), env_set.end());
    p.target = StandardScaler::fit(y, p.fit_set_id, {"yield"});

    const std::size_t t = data.weather.front().values.dim(1);
    Tensor w({envs.size() * t, kWeatherChannels});
    for (std::size_t e = 0; e < envs.size(); ++e) {
        const Tensor& series = data.weather[data.weather_index(envs[e])].values;
        for (std::size_t c = 0; c < kWeatherChannels; ++c)
            for (std::size_t k = 0; k < t; ++k)
                w.at(e * t + k, c) = series.at(c, k);
    }
    p.weather = StandardScaler::fit(w, p.fit_set_id, string_names(kWeatherChannelNames));

    const auto soil_rows = feature_rows(data.soil, envs);
    const auto soil_means = observed_means(data.soil, soil_rows, "soil");
    p.soil = StandardScaler::fit(imputed_rows(data.soil, soil_rows, soil_means, &p.imputed_cells), p.fit_set_id,
                                 data.soil.feature_names);
    const auto mgmt_rows = feature_rows(data.management, envs);
    const auto mgmt_means = observed_means(data.management, mgmt_rows, "management");
    p.management = StandardScaler::fit(imputed_rows(data.management, mgmt_rows, mgmt_means, &p.imputed_cells),
                                       p.fit_set_id, data.management.feature_names);
    return p;
}

TrainingData Preprocessor::encode(const Dataset& data, const ModelConfig& config) const
{
    TrainingData out;
    const std::size_t ne = data.weather.size();
    const std::size_t t = data.weather.front().values.dim(1);
    if (config.weather_length != t || config.weather_channels != kWeatherChannels)
        throw ConfigError("model weather input must be " + std::to_string(kWeatherChannels) + " x " +
                          std::to_string(t));

    Tensor w({ne * t, kWeatherChannels});
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t c = 0; c < kWeatherChannels; ++c)
            for (std::size_t k = 0; k < t; ++k)
                w.at(e * t + k, c) = data.weather[e].values.at(c, k);
    const Tensor ws = weather.transform(w, fit_set_id);
    out.env_weather = Tensor({ne, kWeatherChannels, t});
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t c = 0; c < kWeatherChannels; ++c)
            for (std::size_t k = 0; k < t; ++k)
                out.env_weather.at(e, c, k) = ws.at(e * t + k, c);

    std::vector<std::string> envs;
    for (const auto& s : data.weather)
        envs.push_back(s.env_id);
    auto scaled_features = [&](const FeatureTable& table, const StandardScaler& scaler) {
        const std::size_t f = table.feature_names.size();
        if (scaler.feature_count() != f)
            throw DataError("feature table has " + std::to_string(f) + " columns, scaler expects " +
                            std::to_string(scaler.feature_count()));
        Tensor rows({ne, f});
        for (std::size_t e = 0; e < ne; ++e) {
            if (!table.contains(envs[e]))
                continue;
            const auto& src = table.rows[table.index(envs[e])];
            for (std::size_t j = 0; j < f; ++j)
                rows.at(e, j) = std::isnan(src[j]) ? scaler.means()[j] : src[j];
        }
        return scaler.transform(rows, fit_set_id);
    };
    out.env_soil = scaled_features(data.soil, soil);
    out.env_management = scaled_features(data.management, management);
    if (config.soil_features != out.env_soil.dim(1) || config.management_features != out.env_management.dim(1))
        throw ConfigError("model soil/management widths do not match the feature tables");

    if (config.variant == Variant::no_g)
        return out;
    if (snp_ids.size() != config.snp_count)
        throw ConfigError("model expects " + std::to_string(config.snp_count) + " SNPs, preprocessing selected " +
                          std::to_string(snp_ids.size()));
    const std::size_t s = snp_ids.size();
    const std::size_t width = config.context_width();
    const std::size_t h = data.genotypes.hybrid_count();
    std::vector<std::size_t> cols;
    for (const auto& id : snp_ids)
        cols.push_back(data.genotypes.snp_index(id));
    out.hybrid_snps = Tensor({h, s, 4, width});
    out.positional = Tensor({s, config.snp_dim()});
    for (std::size_t j = 0; j < s; ++j) {
        const SnpDescriptor& snp = data.genotypes.snps[cols[j]];
        const Tensor code = positional_code(snp.chromosome, snp.position, config.snp_dim());
        std::copy(code.data().begin(), code.data().end(),
                  out.positional.data().begin() + static_cast<std::ptrdiff_t>(j * config.snp_dim()));
    }
    const std::size_t block = 4 * width;
    for (std::size_t hy = 0; hy < h; ++hy)
        for (std::size_t j = 0; j < s; ++j) {
            const Tensor m = build_context_matrix(data.genotypes.snps[cols[j]], data.genotypes.call(hy, cols[j]),
                                                  config.context_flank);
            std::copy(m.data().begin(), m.data().end(),
                      out.hybrid_snps.data().begin() + static_cast<std::ptrdiff_t>((hy * s + j) * block));
        }
    return out;
}

std::vector<SampleRow> Preprocessor::rows(const Dataset& data, std::span<const std::size_t> observations) const
{
    const auto hybrids = make_index(data.genotypes.hybrids);
    std::vector<SampleRow> out;
    out.reserve(observations.size());
    for (std::size_t o : observations) {
        const Observation& obs = data.observations[o];
        out.push_back({hybrids.at(obs.hybrid_id), data.weather_index(obs.env_id), target.transform_value(0, obs.yield)});
    }
    return out;
}

nlohmann::json Preprocessor::to_json() const
{
    return {{"fit_set_id", fit_set_id},
            {"snp_ids", snp_ids},
            {"imputed_cells", imputed_cells},
            {"scalers",
             {{"weather", weather.to_json()},
              {"soil", soil.to_json()},
              {"management", management.to_json()},
              {"target", target.to_json()}}}};
}

Preprocessor Preprocessor::from_json(const nlohmann::json& doc)
{
    Preprocessor p;
    try {
        p.fit_set_id = doc.at("fit_set_id").get<std::string>();
        p.snp_ids = doc.at("snp_ids").get<std::vector<std::string>>();
        p.imputed_cells = doc.at("imputed_cells").get<std::size_t>();
        const auto& s = doc.at("scalers");
        p.weather = StandardScaler::from_json(s.at("weather"));
        p.soil = StandardScaler::from_json(s.at("soil"));
        p.management = StandardScaler::from_json(s.at("management"));
        p.target = StandardScaler::from_json(s.at("target"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed preprocessing record: ") + e.what());
    }
    return p;
}

} // namespace deepg2p
