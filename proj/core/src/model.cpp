#include "deepg2p/model.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/ops.hpp"

#include <cmath>

namespace deepg2p {

std::string_view variant_name(Variant v)
{
    switch (v) {
    case Variant::full: return "full";
    case Variant::no_ge: return "no_ge";
    case Variant::no_g: return "no_g";
    }
    return "full";
}

Variant parse_variant(std::string_view name)
{
    if (name == "full")
        return Variant::full;
    if (name == "no_ge")
        return Variant::no_ge;
    if (name == "no_g")
        return Variant::no_g;
    throw ConfigError("unknown model variant '" + std::string(name) + "' (expected full, no_ge or no_g)");
}

std::size_t ModelConfig::weather_steps() const
{
    const std::size_t shrink = weather_conv_channels.size() * (weather_kernel - 1);
    return weather_length > shrink ? weather_length - shrink : 0;
}

std::size_t ModelConfig::fusion_input() const
{
    std::size_t width = weather_dim() + soil_hidden.back() + management_hidden.back();
    if (variant != Variant::no_g)
        width += snp_dim();
    return width;
}

void ModelConfig::validate() const
{
    auto positive = [](const std::vector<std::size_t>& v) {
        if (v.empty())
            return false;
        for (std::size_t x : v)
            if (x == 0)
                return false;
        return true;
    };
    if (snp_count == 0 || filters == 0 || weather_channels == 0 || weather_length == 0 || weather_kernel == 0 ||
        soil_features == 0 || management_features == 0)
        throw ConfigError("model: all widths must be positive");
    if (!positive(kernel_lengths) || !positive(weather_conv_channels) || !positive(soil_hidden) ||
        !positive(management_hidden) || !positive(fusion_hidden))
        throw ConfigError("model: layer width lists must be non-empty and positive");
    for (std::size_t k : kernel_lengths)
        if (k > context_width())
            throw ConfigError("model: kernel length " + std::to_string(k) + " exceeds context width " +
                              std::to_string(context_width()));
    if (snp_dim() % 2 != 0)
        throw ConfigError("model: SNP embedding dimension must be even for the positional code");
    if (weather_steps() == 0)
        throw ConfigError("model: weather length too short for the convolution stack");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw ConfigError("model: dropout must lie in [0, 1)");
}

nlohmann::json ModelConfig::to_json() const
{
    return {
        {"snp_count", snp_count},
        {"context_flank", context_flank},
        {"kernel_lengths", kernel_lengths},
        {"filters", filters},
        {"weather_channels", weather_channels},
        {"weather_length", weather_length},
        {"weather_conv_channels", weather_conv_channels},
        {"weather_kernel", weather_kernel},
        {"soil_features", soil_features},
        {"soil_hidden", soil_hidden},
        {"management_features", management_features},
        {"management_hidden", management_hidden},
        {"fusion_hidden", fusion_hidden},
        {"dropout", dropout},
        {"variant", std::string(variant_name(variant))},
    };
}

ModelConfig ModelConfig::from_json(const nlohmann::json& doc)
{
    return from_json(doc, ModelConfig{});
}

ModelConfig ModelConfig::from_json(const nlohmann::json& doc, ModelConfig c)
{
    if (!doc.is_object())
        throw ConfigError("model: config must be an object");
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "snp_count") c.snp_count = value.get<std::size_t>();
            else if (key == "context_flank") c.context_flank = value.get<std::size_t>();
            else if (key == "kernel_lengths") c.kernel_lengths = value.get<std::vector<std::size_t>>();
            else if (key == "filters") c.filters = value.get<std::size_t>();
            else if (key == "weather_channels") c.weather_channels = value.get<std::size_t>();
            else if (key == "weather_length") c.weather_length = value.get<std::size_t>();
            else if (key == "weather_conv_channels") c.weather_conv_channels = value.get<std::vector<std::size_t>>();
            else if (key == "weather_kernel") c.weather_kernel = value.get<std::size_t>();
            else if (key == "soil_features") c.soil_features = value.get<std::size_t>();
            else if (key == "soil_hidden") c.soil_hidden = value.get<std::vector<std::size_t>>();
            else if (key == "management_features") c.management_features = value.get<std::size_t>();
            else if (key == "management_hidden") c.management_hidden = value.get<std::vector<std::size_t>>();
            else if (key == "fusion_hidden") c.fusion_hidden = value.get<std::vector<std::size_t>>();
            else if (key == "dropout") c.dropout = value.get<double>();
            else if (key == "variant") c.variant = parse_variant(value.get<std::string>());
            else
                throw ConfigError("model." + key + ": unknown field");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("model." + key + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

std::uint64_t ModelConfig::hash() const
{
    return fnv1a64(to_json().dump());
}

namespace {

struct SlotSpec {
    std::string name;
    Shape shape;
    std::size_t fan_in;
};

void add_dense(std::vector<SlotSpec>& specs, const std::string& prefix, std::size_t in, std::size_t out)
{
    specs.push_back({prefix + ".weight", {out, in}, in});
    specs.push_back({prefix + ".bias", {out}, in});
}

std::vector<SlotSpec> slot_specs(const ModelConfig& c)
{
    std::vector<SlotSpec> specs;
    const std::size_t d = c.snp_dim();
    const std::size_t dw = c.weather_dim();
    if (c.variant != Variant::no_g) {
        for (std::size_t k : c.kernel_lengths) {
            const std::string prefix = "genome.conv_k" + std::to_string(k);
            specs.push_back({prefix + ".weight", {c.filters, 4, k}, 4 * k});
            specs.push_back({prefix + ".bias", {c.filters}, 4 * k});
        }
    }
    std::size_t in_ch = c.weather_channels;
    for (std::size_t i = 0; i < c.weather_conv_channels.size(); ++i) {
        const std::string prefix = "weather.conv" + std::to_string(i);
        const std::size_t out_ch = c.weather_conv_channels[i];
        specs.push_back({prefix + ".weight", {out_ch, in_ch, c.weather_kernel}, in_ch * c.weather_kernel});
        specs.push_back({prefix + ".bias", {out_ch}, in_ch * c.weather_kernel});
        in_ch = out_ch;
    }
    if (c.variant == Variant::full) {
        specs.push_back({"attention.key.weight", {d, dw}, dw});
        add_dense(specs, "attention.out", dw, d);
    }
    std::size_t in = c.soil_features;
    for (std::size_t i = 0; i < c.soil_hidden.size(); ++i) {
        add_dense(specs, "soil.dense" + std::to_string(i), in, c.soil_hidden[i]);
        in = c.soil_hidden[i];
    }
    in = c.management_features;
    for (std::size_t i = 0; i < c.management_hidden.size(); ++i) {
        add_dense(specs, "management.dense" + std::to_string(i), in, c.management_hidden[i]);
        in = c.management_hidden[i];
    }
    in = c.fusion_input();
    for (std::size_t i = 0; i < c.fusion_hidden.size(); ++i) {
        add_dense(specs, "fusion.dense" + std::to_string(i), in, c.fusion_hidden[i]);
        in = c.fusion_hidden[i];
    }
    add_dense(specs, "fusion.output", in, 1);
    return specs;
}

} // namespace

ModelParams init_params(const ModelConfig& config, const RngStream& rng)
{
    config.validate();
    ModelParams params{config, {}};
    for (const SlotSpec& spec : slot_specs(config)) {
        RngStream slot_rng = rng.fork(spec.name);
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
        Tensor value(spec.shape);
        for (double& v : value.data())
            v = slot_rng.uniform(-bound, bound);
        params.store.add(spec.name, std::move(value));
    }
    return params;
}

nlohmann::json params_to_json(const ModelParams& params)
{
    nlohmann::json doc;
    doc["config"] = params.config.to_json();
    doc["config_hash"] = params.config.hash();
    doc["parameters"] = nlohmann::json::array();
    for (std::size_t i = 0; i < params.store.size(); ++i) {
        const Tensor& t = params.store.value(i);
        doc["parameters"].push_back({{"name", params.store.name(i)}, {"shape", t.shape()}, {"data", t.values()}});
    }
    return doc;
}

ModelParams params_from_json(const nlohmann::json& doc)
{
    try {
        ModelConfig config = ModelConfig::from_json(doc.at("config"));
        if (doc.contains("config_hash") && doc.at("config_hash").get<std::uint64_t>() != config.hash())
            throw DataError("checkpoint config hash does not match its config");
        ModelParams params{config, {}};
        const auto specs = slot_specs(config);
        const auto& list = doc.at("parameters");
        if (list.size() != specs.size())
            throw DataError("checkpoint has " + std::to_string(list.size()) + " parameters, config implies " +
                            std::to_string(specs.size()));
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const auto& entry = list.at(i);
            if (entry.at("name").get<std::string>() != specs[i].name)
                throw DataError("checkpoint parameter " + std::to_string(i) + " is '" +
                                entry.at("name").get<std::string>() + "', expected '" + specs[i].name + "'");
            Shape shape = entry.at("shape").get<Shape>();
            if (shape != specs[i].shape)
                throw DataError("checkpoint parameter '" + specs[i].name + "' has shape " + shape_string(shape));
            params.store.add(specs[i].name, Tensor(std::move(shape), entry.at("data").get<std::vector<double>>()));
        }
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

BoundParams::BoundParams(ComputationRecord& rec, const ModelParams& params)
  : rec_(rec)
  , params_(params)
  , cache_(params.store.size())
{
    if (rec.parameters() != &params.store)
        throw ConfigError("computation record is not bound to this parameter store");
}

Var BoundParams::operator()(std::string_view name)
{
    const std::size_t slot = params_.store.index(name);
    if (!cache_[slot].valid())
        cache_[slot] = rec_.parameter(slot);
    return cache_[slot];
}

namespace {

Var mlp(BoundParams& p, Var x, const std::string& prefix, std::size_t layers)
{
    ComputationRecord& rec = p.record();
    for (std::size_t i = 0; i < layers; ++i) {
        const std::string name = prefix + ".dense" + std::to_string(i);
        ScopedLabel label(rec, name);
        x = ops::relu(rec, ops::dense(rec, x, p(name + ".weight"), p(name + ".bias")));
    }
    return x;
}

void require_shape(const Tensor& t, const Shape& expected, const char* what)
{
    if (t.shape() != expected)
        throw ShapeError(std::string(what) + ": expected " + shape_string(expected) + ", got " +
                         shape_string(t.shape()));
}

} // namespace

Var genome_forward(BoundParams& p, const Tensor& snps, const Tensor& positional)
{
    const ModelConfig& c = p.config();
    ComputationRecord& rec = p.record();
    if (snps.rank() != 4 || snps.dim(2) != 4 || snps.dim(3) != c.context_width())
        throw ShapeError("genome_forward: SNP tensor must be B x S x 4 x " + std::to_string(c.context_width()) +
                         ", got " + shape_string(snps.shape()));
    const std::size_t batch = snps.dim(0);
    const std::size_t s = snps.dim(1);
    const std::size_t d = c.snp_dim();
    require_shape(positional, {s, d}, "genome_forward positional codes");

    ScopedLabel scope(rec, "genome");
    Var x = rec.constant(snps.reshaped({batch * s, 4, c.context_width()}), "snps");
    std::vector<Var> pooled;
    for (std::size_t k : c.kernel_lengths) {
        const std::string name = "genome.conv_k" + std::to_string(k);
        ScopedLabel label(rec, "conv_k" + std::to_string(k));
        Var conv = ops::conv1d(rec, x, p(name + ".weight"), p(name + ".bias"));
        pooled.push_back(ops::maxpool_over_time(rec, ops::relu(rec, conv)));
    }
    Var joined = ops::concat_columns(rec, pooled);
    Var embeddings = ops::reshape(rec, joined, {batch, s, d});

    Tensor codes({batch, s, d});
    for (std::size_t b = 0; b < batch; ++b)
        std::copy(positional.data().begin(), positional.data().end(),
                  codes.data().begin() + static_cast<std::ptrdiff_t>(b * s * d));
    return ops::add(rec, embeddings, rec.constant(std::move(codes), "positional"));
}

WeatherOutput weather_forward(BoundParams& p, const Tensor& weather)
{
    const ModelConfig& c = p.config();
    ComputationRecord& rec = p.record();
    if (weather.rank() != 3 || weather.dim(1) != c.weather_channels || weather.dim(2) != c.weather_length)
        throw ShapeError("weather_forward: expected B x " + std::to_string(c.weather_channels) + " x " +
                         std::to_string(c.weather_length) + ", got " + shape_string(weather.shape()));
    ScopedLabel scope(rec, "weather");
    Var x = rec.constant(weather, "weather");
    for (std::size_t i = 0; i < c.weather_conv_channels.size(); ++i) {
        const std::string name = "weather.conv" + std::to_string(i);
        ScopedLabel label(rec, "conv" + std::to_string(i));
        x = ops::relu(rec, ops::conv1d(rec, x, p(name + ".weight"), p(name + ".bias")));
    }
    return {ops::transpose_last(rec, x), ops::maxpool_over_time(rec, x)};
}

AttentionOutput cross_attention(ComputationRecord& rec, Var queries, Var sequences,
                                const std::vector<std::size_t>& rows, Var key_weight, Var out_weight,
                                Var out_bias, bool with_context)
{
    const Tensor& q = rec.value(queries);
    const Tensor& ys = rec.value(sequences);
    if (q.rank() != 3 || ys.rank() != 3)
        throw ShapeError("cross_attention: expected B x S x d queries and U x T x d_w sequences");
    const std::size_t batch = q.dim(0), d = q.dim(2);
    const std::size_t units = ys.dim(0), steps = ys.dim(1), dw = ys.dim(2);
    if (steps == 0)
        throw ShapeError("cross_attention: empty weather sequence");
    if (rows.empty() ? units != batch : rows.size() != batch)
        throw ShapeError("cross_attention: sequence rows do not match the batch");

    ScopedLabel scope(rec, "attention");
    Var flat = ops::reshape(rec, sequences, {units * steps, dw});
    Var keys = ops::reshape(rec, ops::dense(rec, flat, key_weight), {units, steps, d});
    Var values = ops::reshape(rec, ops::dense(rec, flat, out_weight, out_bias), {units, steps, d});
    Var seq = sequences;
    if (!rows.empty()) {
        keys = ops::gather_rows(rec, keys, rows);
        values = ops::gather_rows(rec, values, rows);
        if (with_context)
            seq = ops::gather_rows(rec, sequences, rows);
    }
    Var scores = ops::scale(rec, ops::batched_matmul(rec, queries, keys, true), 1.0 / std::sqrt(static_cast<double>(d)));
    AttentionOutput out;
    out.weights = ops::softmax(rec, scores);
    out.embedding = ops::batched_matmul(rec, out.weights, values, false);
    if (with_context)
        out.context = ops::batched_matmul(rec, out.weights, seq, false);
    return out;
}

ForwardOutput model_forward(ComputationRecord& rec, const ModelParams& params, const ModelInputs& inputs, Mode mode,
                            RngStream* dropout_rng)
{
    const ModelConfig& c = params.config;
    BoundParams p(rec, params);
    const std::size_t batch = inputs.batch();
    require_shape(inputs.soil, {batch, c.soil_features}, "soil features");
    require_shape(inputs.management, {batch, c.management_features}, "management features");
    const bool training = mode == Mode::train;
    if (training && c.dropout > 0.0 && !dropout_rng)
        throw ConfigError("model_forward: train mode with dropout needs an rng stream");

    ForwardOutput out;
    WeatherOutput weather = weather_forward(p, inputs.weather);
    const auto& rows = inputs.weather_rows;
    if (rows.empty() ? inputs.weather.dim(0) != batch : rows.size() != batch)
        throw ShapeError("model_forward: weather rows do not match the batch of " + std::to_string(batch));
    std::vector<Var> parts;
    if (c.variant != Variant::no_g) {
        if (inputs.snps.rank() != 4 || inputs.snps.dim(0) != batch || inputs.snps.dim(1) != c.snp_count)
            throw ShapeError("model_forward: SNP tensor must be " + std::to_string(batch) + " x " +
                             std::to_string(c.snp_count) + " x ..., got " + shape_string(inputs.snps.shape()));
        Var embeddings = genome_forward(p, inputs.snps, inputs.positional);
        if (c.variant == Variant::full) {
            AttentionOutput att = cross_attention(rec, embeddings, weather.sequence, rows, p("attention.key.weight"),
                                                  p("attention.out.weight"), p("attention.out.bias"));
            embeddings = ops::add(rec, embeddings, att.embedding);
            out.attention = att.weights;
        }
        ScopedLabel label(rec, "genome_pool");
        parts.push_back(ops::reduce_max(rec, embeddings, 1));
    }
    if (!rows.empty()) {
        ScopedLabel label(rec, "weather_gather");
        weather.pooled = ops::gather_rows(rec, weather.pooled, rows);
    }
    parts.push_back(weather.pooled);
    parts.push_back(mlp(p, rec.constant(inputs.soil, "soil"), "soil", c.soil_hidden.size()));
    parts.push_back(mlp(p, rec.constant(inputs.management, "management"), "management", c.management_hidden.size()));

    ScopedLabel scope(rec, "fusion");
    Var x = ops::concat_columns(rec, parts);
    for (std::size_t i = 0; i < c.fusion_hidden.size(); ++i) {
        const std::string name = "fusion.dense" + std::to_string(i);
        ScopedLabel label(rec, "dense" + std::to_string(i));
        x = ops::relu(rec, ops::dense(rec, x, p(name + ".weight"), p(name + ".bias")));
        if (training)
            x = ops::dropout(rec, x, c.dropout, *dropout_rng, true);
    }
    Var y = ops::dense(rec, x, p("fusion.output.weight"), p("fusion.output.bias"));
    out.prediction = ops::reshape(rec, y, {batch});
    return out;
}

std::vector<double> predict(const ModelParams& params, const ModelInputs& inputs)
{
    ParameterStore& store = const_cast<ParameterStore&>(params.store);
    ComputationRecord rec(&store);
    ForwardOutput out = model_forward(rec, params, inputs, Mode::inference);
    return rec.value(out.prediction).values();
}

Tensor attention_trace(const ModelParams& params, const ModelInputs& inputs)
{
    if (params.config.variant != Variant::full)
        throw ConfigError("attention trace requires the full model variant");
    ParameterStore& store = const_cast<ParameterStore&>(params.store);
    ComputationRecord rec(&store);
    ForwardOutput out = model_forward(rec, params, inputs, Mode::inference);
    return rec.value(out.attention);
}

} // namespace deepg2p
