#pragma once

#include "deepg2p/record.hpp"
#include "deepg2p/rng.hpp"
#include "deepg2p/tensor.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace deepg2p {

enum class Variant { full, no_ge, no_g };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

enum class Mode { train, inference };

/// Architecture hyperparameters. Every width is overridable; defaults are
/// the documented stand-ins listed in the README.
struct ModelConfig {
    std::size_t snp_count = 100;
    std::size_t context_flank = 2; // w: context is 2w+1 bases
    std::vector<std::size_t> kernel_lengths{2, 3, 4};
    std::size_t filters = 16; // per kernel length
    std::size_t weather_channels = 9;
    std::size_t weather_length = 43;
    std::vector<std::size_t> weather_conv_channels{32, 64};
    std::size_t weather_kernel = 3;
    std::size_t soil_features = 19;
    std::vector<std::size_t> soil_hidden{32, 16};
    std::size_t management_features = 5;
    std::vector<std::size_t> management_hidden{16, 8};
    std::vector<std::size_t> fusion_hidden{128, 32};
    double dropout = 0.2;
    Variant variant = Variant::full;

    std::size_t context_width() const { return 2 * context_flank + 1; }
    /// d: SNP embedding and positional code dimension.
    std::size_t snp_dim() const { return filters * kernel_lengths.size(); }
    /// d_w: weather embedding dimension.
    std::size_t weather_dim() const { return weather_conv_channels.back(); }
    /// T': weather sequence length after the valid convolutions.
    std::size_t weather_steps() const;
    std::size_t fusion_input() const;

    void validate() const;
    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& doc);
    static ModelConfig from_json(const nlohmann::json& doc, ModelConfig base);
    std::uint64_t hash() const;
};

struct ModelParams {
    ModelConfig config;
    ParameterStore store;
};

/// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and
/// biases. Each slot draws from its own stream forked by slot name, so slots
/// shared between variants get identical values.
ModelParams init_params(const ModelConfig& config, const RngStream& rng);

nlohmann::json params_to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& doc);

/// One batch of model inputs.
struct ModelInputs {
    Tensor snps;       // B x S x 4 x (2w+1)
    Tensor positional; // S x d
    Tensor weather;    // U x C x T
    Tensor soil;       // B x soil_features
    Tensor management; // B x management_features
    /// Weather row of each batch row; empty means U = B and row i uses row i.
    /// Lets a batch share one weather branch evaluation per environment.
    std::vector<std::size_t> weather_rows;

    std::size_t batch() const { return soil.dim(0); }
};

/// Resolves parameter slots to record variables (one node per slot).
class BoundParams {
public:
    BoundParams(ComputationRecord& rec, const ModelParams& params);
    Var operator()(std::string_view name);
    ComputationRecord& record() { return rec_; }
    const ModelConfig& config() const { return params_.config; }

private:
    ComputationRecord& rec_;
    const ModelParams& params_;
    std::vector<Var> cache_;
};

/// S x d SNP embeddings per batch row (B x S x d): shared multi-width conv,
/// ReLU, max over positions, concatenation, plus the positional code.
Var genome_forward(BoundParams& p, const Tensor& snps, const Tensor& positional);

struct WeatherOutput {
    Var sequence; // U x T' x d_w
    Var pooled;   // U x d_w
};
WeatherOutput weather_forward(BoundParams& p, const Tensor& weather);

struct AttentionOutput {
    Var embedding; // B x S x d, the G*E embedding added to the SNP embedding
    Var weights;   // B x S x T'
    Var context;   // B x S x d_w before the output dense layer (only when requested)
};
/// score(x, y_t) = x . (W_k y_t) / sqrt(d); alpha = softmax over t;
/// embedding = W_o (sum_t alpha_t y_t) + b_o, evaluated as sum_t alpha_t (W_o y_t + b_o)
/// so keys and projected values are computed once per sequence.
/// queries B x S x d; sequences U x T' x d_w; rows maps each batch row to its
/// sequence (empty: U = B, identity).
AttentionOutput cross_attention(ComputationRecord& rec, Var queries, Var sequences,
                                const std::vector<std::size_t>& rows, Var key_weight, Var out_weight,
                                Var out_bias, bool with_context = false);

struct ForwardOutput {
    Var prediction; // B
    Var attention;  // B x S x T' (invalid unless the variant is full)
};

/// dropout_rng is required in train mode when dropout > 0.
ForwardOutput model_forward(ComputationRecord& rec, const ModelParams& params, const ModelInputs& inputs, Mode mode,
                            RngStream* dropout_rng = nullptr);

std::vector<double> predict(const ModelParams& params, const ModelInputs& inputs);
/// B x S x T' attention weights (full variant only).
Tensor attention_trace(const ModelParams& params, const ModelInputs& inputs);

} // namespace deepg2p
