#include "deepg2p/kernels.hpp"

#include "deepg2p/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace deepg2p {

Tensor conv1d_valid(const Tensor& input, const Tensor& kernels, const Tensor& bias)
{
    const bool batched = input.rank() == 3;
    if (!batched && input.rank() != 2)
        throw ShapeError("conv1d: input must be C_in x L or N x C_in x L, got " +
                         shape_string(input.shape()));
    if (kernels.rank() != 3)
        throw ShapeError("conv1d: kernels must be C_out x C_in x k, got " +
                         shape_string(kernels.shape()));
    const std::size_t n = batched ? input.dim(0) : 1;
    const std::size_t c_in = input.dim(batched ? 1 : 0);
    const std::size_t len = input.dim(batched ? 2 : 1);
    const std::size_t c_out = kernels.dim(0);
    const std::size_t k = kernels.dim(2);
    if (kernels.dim(1) != c_in)
        throw ShapeError("conv1d: kernel input channels " + std::to_string(kernels.dim(1)) +
                         " != input channels " + std::to_string(c_in));
    if (bias.rank() != 1 || bias.dim(0) != c_out)
        throw ShapeError("conv1d: bias must have " + std::to_string(c_out) + " entries");
    if (k > len)
        throw ShapeError("conv1d: kernel length " + std::to_string(k) + " exceeds input length " +
                         std::to_string(len));

    const std::size_t out_len = len - k + 1;
    const std::size_t patch = c_in * k;
    Tensor out(batched ? Shape{n, c_out, out_len} : Shape{c_out, out_len});
    const double* x = input.data().data();
    const double* w = kernels.data().data();
    double* y = out.data().data();
    // Patch-major form: each output step is a patch (c_in*k values) times W^T.
    std::vector<double> wt(patch * c_out);
    for (std::size_t c = 0; c < c_out; ++c)
        for (std::size_t q = 0; q < patch; ++q)
            wt[q * c_out + c] = w[c * patch + q];
    std::vector<double> p(patch);
    std::vector<double> acc(c_out);
    for (std::size_t b = 0; b < n; ++b) {
        const double* xb = x + b * c_in * len;
        double* yb = y + b * c_out * out_len;
        for (std::size_t t = 0; t < out_len; ++t) {
            for (std::size_t i = 0; i < c_in; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    p[i * k + j] = xb[i * len + t + j];
            for (std::size_t c = 0; c < c_out; ++c)
                acc[c] = bias[c];
            for (std::size_t q = 0; q < patch; ++q) {
                const double pq = p[q];
                const double* wrow = wt.data() + q * c_out;
                for (std::size_t c = 0; c < c_out; ++c)
                    acc[c] += pq * wrow[c];
            }
            for (std::size_t c = 0; c < c_out; ++c)
                yb[c * out_len + t] = acc[c];
        }
    }
    return out;
}

MaxResult reduce_max(const Tensor& input, std::size_t axis)
{
    if (axis >= input.rank())
        throw ShapeError("reduce_max: axis out of range for " + shape_string(input.shape()));
    const Shape& shape = input.shape();
    std::size_t outer = 1;
    std::size_t inner = 1;
    for (std::size_t a = 0; a < axis; ++a)
        outer *= shape[a];
    for (std::size_t a = axis + 1; a < shape.size(); ++a)
        inner *= shape[a];
    const std::size_t extent = shape[axis];

    Shape out_shape;
    for (std::size_t a = 0; a < shape.size(); ++a)
        if (a != axis)
            out_shape.push_back(shape[a]);
    if (out_shape.empty())
        out_shape.push_back(1);

    MaxResult result{Tensor(out_shape), std::vector<std::size_t>(outer * inner, 0)};
    const double* x = input.data().data();
    double* y = result.values.data().data();
    for (std::size_t o = 0; o < outer; ++o) {
        const double* block = x + o * extent * inner;
        for (std::size_t i = 0; i < inner; ++i) {
            double best = block[i];
            std::size_t best_idx = 0;
            for (std::size_t e = 1; e < extent; ++e) {
                const double v = block[e * inner + i];
                if (v > best) {
                    best = v;
                    best_idx = e;
                }
            }
            y[o * inner + i] = best;
            result.argmax[o * inner + i] = best_idx;
        }
    }
    return result;
}

MaxResult maxpool_over_time(const Tensor& input)
{
    if (input.rank() != 2 && input.rank() != 3)
        throw ShapeError("maxpool_over_time: expected C x L or N x C x L, got " +
                         shape_string(input.shape()));
    return reduce_max(input, input.rank() - 1);
}

std::vector<double> softmax(std::span<const double> scores)
{
    if (scores.empty())
        throw ShapeError("softmax: empty input");
    double peak = -std::numeric_limits<double>::infinity();
    for (double s : scores) {
        if (!std::isfinite(s))
            throw NumericError("softmax: non-finite score");
        peak = std::max(peak, s);
    }
    std::vector<double> out(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - peak);
        total += out[i];
    }
    for (double& v : out)
        v /= total;
    return out;
}

Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias)
{
    if (weight.rank() != 2)
        throw ShapeError("dense: weight must be m x n, got " + shape_string(weight.shape()));
    const std::size_t m = weight.dim(0);
    const std::size_t n = weight.dim(1);
    const bool batched = input.rank() == 2;
    if (!batched && input.rank() != 1)
        throw ShapeError("dense: input must be n or N x n, got " + shape_string(input.shape()));
    const std::size_t rows = batched ? input.dim(0) : 1;
    if (input.dim(batched ? 1 : 0) != n)
        throw ShapeError("dense: input width " + std::to_string(input.dim(batched ? 1 : 0)) +
                         " != weight columns " + std::to_string(n));
    const bool has_bias = !bias.empty();
    if (has_bias && (bias.rank() != 1 || bias.dim(0) != m))
        throw ShapeError("dense: bias must have " + std::to_string(m) + " entries");

    Tensor out(batched ? Shape{rows, m} : Shape{m});
    const double* x = input.data().data();
    const double* w = weight.data().data();
    double* y = out.data().data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * n;
        for (std::size_t j = 0; j < m; ++j) {
            const double* wj = w + j * n;
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += wj[k] * xr[k];
            y[r * m + j] = has_bias ? acc + bias[j] : acc;
        }
    }
    return out;
}

Tensor relu(const Tensor& input)
{
    Tensor out = input;
    for (double& v : out.data())
        v = v > 0.0 ? v : 0.0;
    return out;
}

double mse_loss(std::span<const double> prediction, std::span<const double> target)
{
    if (prediction.size() != target.size() || prediction.empty())
        throw ShapeError("mse_loss: prediction/target length mismatch or empty");
    double total = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double d = prediction[i] - target[i];
        total += d * d;
    }
    return total / static_cast<double>(prediction.size());
}

} // namespace deepg2p
