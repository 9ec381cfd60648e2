#pragma once

#include "deepg2p/crossval.hpp"
#include "deepg2p/model.hpp"
#include "deepg2p/ops.hpp"
#include "deepg2p/record.hpp"
#include "deepg2p/rng.hpp"
#include "deepg2p/synth.hpp"
#include "deepg2p/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepg2p::testing {

inline Tensor random_tensor(Shape shape, RngStream& rng, double lo = -1.0, double hi = 1.0)
{
    Tensor t(std::move(shape));
    for (double& v : t.data())
        v = rng.uniform(lo, hi);
    return t;
}

struct GradCheck {
    double max_relative_error = 0.0;
    std::string worst_slot;
    std::size_t checked = 0;
};

/// Central differences against the record's analytic gradients for every
/// entry of every slot. Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheck check_gradients(ParameterStore& store, const std::function<Var(ComputationRecord&)>& loss,
                                 double h = 1e-5, double floor = 1e-6)
{
    {
        ComputationRecord rec(&store);
        rec.backward(loss(rec));
    }
    std::vector<Tensor> analytic;
    for (std::size_t s = 0; s < store.size(); ++s)
        analytic.push_back(store.grad(s));
    auto eval = [&] {
        ComputationRecord rec(&store);
        return rec.value(loss(rec))[0];
    };
    GradCheck out;
    for (std::size_t s = 0; s < store.size(); ++s) {
        for (std::size_t i = 0; i < store.value(s).size(); ++i) {
            const double original = store.value(s)[i];
            store.mutable_value(s)[i] = original + h;
            const double up = eval();
            store.mutable_value(s)[i] = original - h;
            const double down = eval();
            store.mutable_value(s)[i] = original;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[s][i];
            const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
            if (rel > out.max_relative_error) {
                out.max_relative_error = rel;
                out.worst_slot = store.name(s) + "[" + std::to_string(i) + "]";
            }
            ++out.checked;
        }
    }
    return out;
}

/// The gradient-check configuration: 5 SNPs, w = 2, 8 weather steps.
inline ModelConfig tiny_model_config(Variant variant = Variant::full)
{
    ModelConfig c;
    c.snp_count = 5;
    c.context_flank = 2;
    c.kernel_lengths = {2, 3};
    c.filters = 2;
    c.weather_channels = 9;
    c.weather_length = 8;
    c.weather_conv_channels = {4, 6};
    c.weather_kernel = 3;
    c.soil_features = 19;
    c.soil_hidden = {6, 4};
    c.management_features = 5;
    c.management_hidden = {4, 3};
    c.fusion_hidden = {8, 5};
    c.dropout = 0.0;
    c.variant = variant;
    return c;
}

/// Random inputs with one-hot-like SNP columns; every batch row has its own
/// weather row unless shared_weather is set.
inline ModelInputs random_inputs(const ModelConfig& c, std::size_t batch, RngStream& rng, bool shared_weather = false)
{
    ModelInputs in;
    const std::size_t w = c.context_width();
    in.snps = Tensor({batch, c.snp_count, 4, w});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t s = 0; s < c.snp_count; ++s)
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t base = rng.below(4);
                const std::size_t other = rng.below(4);
                const std::size_t offset = ((b * c.snp_count + s) * 4) * w + j;
                in.snps[offset + base * w] += 0.5;
                in.snps[offset + other * w] += 0.5;
            }
    in.positional = random_tensor({c.snp_count, c.snp_dim()}, rng);
    const std::size_t envs = shared_weather ? 2 : batch;
    in.weather = random_tensor({envs, c.weather_channels, c.weather_length}, rng, -2.0, 2.0);
    if (shared_weather)
        for (std::size_t b = 0; b < batch; ++b)
            in.weather_rows.push_back(b % envs);
    in.soil = random_tensor({batch, c.soil_features}, rng, -2.0, 2.0);
    in.management = random_tensor({batch, c.management_features}, rng, -2.0, 2.0);
    return in;
}

/// Least squares by Householder QR; x is n x p (n >= p, full column rank).
inline std::vector<double> least_squares(const Tensor& x, std::vector<double> y)
{
    const std::size_t n = x.dim(0), p = x.dim(1);
    if (n < p || y.size() != n)
        throw std::invalid_argument("least_squares: bad shapes");
    Tensor a = x;
    for (std::size_t k = 0; k < p; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i)
            norm += a.at(i, k) * a.at(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0)
            throw std::runtime_error("least_squares: rank deficient");
        const double alpha = a.at(k, k) > 0 ? -norm : norm;
        std::vector<double> v(n - k);
        for (std::size_t i = k; i < n; ++i)
            v[i - k] = a.at(i, k);
        v[0] -= alpha;
        double vnorm = 0.0;
        for (double e : v)
            vnorm += e * e;
        if (vnorm == 0.0)
            continue;
        for (std::size_t j = k; j < p; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i)
                dot += v[i - k] * a.at(i, j);
            const double f = 2.0 * dot / vnorm;
            for (std::size_t i = k; i < n; ++i)
                a.at(i, j) -= f * v[i - k];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i)
            dot += v[i - k] * y[i];
        const double f = 2.0 * dot / vnorm;
        for (std::size_t i = k; i < n; ++i)
            y[i] -= f * v[i - k];
    }
    std::vector<double> beta(p);
    for (std::size_t k = p; k-- > 0;) {
        double s = y[k];
        for (std::size_t j = k + 1; j < p; ++j)
            s -= a.at(k, j) * beta[j];
        beta[k] = s / a.at(k, k);
    }
    return beta;
}

inline std::vector<double> fitted(const Tensor& x, const std::vector<double>& beta)
{
    std::vector<double> out(x.dim(0), 0.0);
    for (std::size_t i = 0; i < x.dim(0); ++i)
        for (std::size_t j = 0; j < x.dim(1); ++j)
            out[i] += x.at(i, j) * beta[j];
    return out;
}

inline double mean_squared_difference(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

/// A dataset small enough to cross-validate in a few seconds.
inline SynthConfig small_synth_config(std::uint64_t seed = 1)
{
    SynthConfig c;
    c.hybrids = 40;
    c.environments = 10;
    c.snps = 30;
    c.causal = 5;
    c.interactions = 2;
    c.sigma = 0.5;
    c.seed = seed;
    return c;
}

inline Dataset small_dataset(std::uint64_t seed = 1)
{
    SynthData d = generate(small_synth_config(seed));
    return assemble_dataset(std::move(d.genotypes), d.weather, std::move(d.soil), std::move(d.management),
                            std::move(d.observations));
}

inline CrossValConfig small_crossval_config(Variant variant = Variant::full)
{
    CrossValConfig c;
    c.model.kernel_lengths = {2, 3};
    c.model.filters = 2;
    c.model.weather_conv_channels = {4, 4};
    c.model.soil_hidden = {4};
    c.model.management_hidden = {4};
    c.model.fusion_hidden = {8};
    c.model.variant = variant;
    c.train.max_epochs = 3;
    c.train.patience = 2;
    c.selection.rfe_target = 20;
    c.selection.final_count = 10;
    c.selection.gbdt.trees = 10;
    return c;
}

} // namespace deepg2p::testing
