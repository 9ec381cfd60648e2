#include "deepg2p/ops.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/kernels.hpp"

#include <cmath>
#include <algorithm>
#include <memory>
#include <vector>

namespace deepg2p::ops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op)
{
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
}

/// Transposes each rows x cols block of a batch of blocks.
std::vector<double> transposed_blocks(const double* src, std::size_t batch, std::size_t rows, std::size_t cols)
{
    std::vector<double> out(batch * rows * cols);
    for (std::size_t b = 0; b < batch; ++b) {
        const double* s = src + b * rows * cols;
        double* d = out.data() + b * rows * cols;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                d[j * rows + i] = s[i * cols + j];
    }
    return out;
}

void accumulate(Tensor& dst, const Tensor& src)
{
    auto d = dst.data();
    auto s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] += s[i];
}

} // namespace

Var conv1d(ComputationRecord& rec, Var input, Var kernels, Var bias)
{
    const Tensor& x = rec.value(input);
    if (x.rank() != 3)
        throw ShapeError("conv1d: recorded input must be N x C_in x L, got " + shape_string(x.shape()));
    Tensor out = conv1d_valid(x, rec.value(kernels), rec.value(bias));
    auto backward = [input, kernels, bias](ComputationRecord& r, const Tensor& gy) {
        const Tensor& xv = r.value(input);
        const Tensor& wv = r.value(kernels);
        const std::size_t n = xv.dim(0), c_in = xv.dim(1), len = xv.dim(2);
        const std::size_t c_out = wv.dim(0), k = wv.dim(2);
        const std::size_t out_len = len - k + 1;
        const std::size_t patch = c_in * k;
        const double* g = gy.data().data();
        const double* xd = xv.data().data();
        const double* wd = wv.data().data();
        double* gb = r.requires_grad(bias) ? r.grad_buffer(bias).data().data() : nullptr;
        double* gw = r.requires_grad(kernels) ? r.grad_buffer(kernels).data().data() : nullptr;
        double* gx = r.requires_grad(input) ? r.grad_buffer(input).data().data() : nullptr;
        std::vector<double> p(patch), gp(patch), gcol(c_out);
        for (std::size_t b = 0; b < n; ++b) {
            const double* xb = xd + b * c_in * len;
            const double* gbatch = g + b * c_out * out_len;
            for (std::size_t t = 0; t < out_len; ++t) {
                for (std::size_t c = 0; c < c_out; ++c)
                    gcol[c] = gbatch[c * out_len + t];
                if (gb)
                    for (std::size_t c = 0; c < c_out; ++c)
                        gb[c] += gcol[c];
                if (gw) {
                    for (std::size_t i = 0; i < c_in; ++i)
                        for (std::size_t j = 0; j < k; ++j)
                            p[i * k + j] = xb[i * len + t + j];
                    for (std::size_t c = 0; c < c_out; ++c) {
                        const double gc = gcol[c];
                        double* gwrow = gw + c * patch;
                        for (std::size_t q = 0; q < patch; ++q)
                            gwrow[q] += gc * p[q];
                    }
                }
                if (gx) {
                    std::fill(gp.begin(), gp.end(), 0.0);
                    for (std::size_t c = 0; c < c_out; ++c) {
                        const double gc = gcol[c];
                        const double* wrow = wd + c * patch;
                        for (std::size_t q = 0; q < patch; ++q)
                            gp[q] += gc * wrow[q];
                    }
                    double* gxb = gx + b * c_in * len;
                    for (std::size_t i = 0; i < c_in; ++i)
                        for (std::size_t j = 0; j < k; ++j)
                            gxb[i * len + t + j] += gp[i * k + j];
                }
            }
        }
    };
    return rec.push(std::move(out), {input, kernels, bias}, std::move(backward), "conv1d");
}

Var relu(ComputationRecord& rec, Var x)
{
    Tensor out = deepg2p::relu(rec.value(x));
    auto backward = [x](ComputationRecord& r, const Tensor& gy) {
        const auto xv = r.value(x).data();
        auto gx = r.grad_buffer(x).data();
        const auto g = gy.data();
        for (std::size_t i = 0; i < gx.size(); ++i)
            if (xv[i] > 0.0)
                gx[i] += g[i];
    };
    return rec.push(std::move(out), {x}, std::move(backward), "relu");
}

Var reduce_max(ComputationRecord& rec, Var x, std::size_t axis)
{
    const Tensor& xv = rec.value(x);
    MaxResult result = deepg2p::reduce_max(xv, axis);
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < xv.rank(); ++a)
        inner *= xv.dim(a);
    const std::size_t extent = xv.dim(axis);
    auto argmax = std::make_shared<std::vector<std::size_t>>(std::move(result.argmax));
    auto backward = [x, argmax, inner, extent](ComputationRecord& r, const Tensor& gy) {
        auto gx = r.grad_buffer(x).data();
        const auto g = gy.data();
        for (std::size_t idx = 0; idx < g.size(); ++idx) {
            const std::size_t o = idx / inner;
            const std::size_t i = idx % inner;
            gx[(o * extent + (*argmax)[idx]) * inner + i] += g[idx];
        }
    };
    return rec.push(std::move(result.values), {x}, std::move(backward), "max");
}

Var maxpool_over_time(ComputationRecord& rec, Var x)
{
    const std::size_t rank = rec.value(x).rank();
    if (rank < 2)
        throw ShapeError("maxpool_over_time: input needs a time axis");
    return reduce_max(rec, x, rank - 1);
}

Var dense(ComputationRecord& rec, Var x, Var weight, Var bias)
{
    const Tensor& xv = rec.value(x);
    if (xv.rank() != 2)
        throw ShapeError("dense: recorded input must be N x n, got " + shape_string(xv.shape()));
    static const Tensor no_bias;
    Tensor out = deepg2p::dense(xv, rec.value(weight), bias.valid() ? rec.value(bias) : no_bias);
    auto backward = [x, weight, bias](ComputationRecord& r, const Tensor& gy) {
        const Tensor& xv = r.value(x);
        const Tensor& wv = r.value(weight);
        const std::size_t rows = xv.dim(0), n = xv.dim(1), m = wv.dim(0);
        const double* g = gy.data().data();
        const double* xd = xv.data().data();
        const double* wd = wv.data().data();
        if (bias.valid() && r.requires_grad(bias)) {
            double* gb = r.grad_buffer(bias).data().data();
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    gb[j] += g[i * m + j];
        }
        if (r.requires_grad(weight)) {
            double* gw = r.grad_buffer(weight).data().data();
            for (std::size_t i = 0; i < rows; ++i) {
                const double* xi = xd + i * n;
                for (std::size_t j = 0; j < m; ++j) {
                    const double gij = g[i * m + j];
                    if (gij == 0.0)
                        continue;
                    double* gwj = gw + j * n;
                    for (std::size_t k = 0; k < n; ++k)
                        gwj[k] += gij * xi[k];
                }
            }
        }
        if (r.requires_grad(x)) {
            double* gx = r.grad_buffer(x).data().data();
            for (std::size_t i = 0; i < rows; ++i) {
                double* gxi = gx + i * n;
                for (std::size_t j = 0; j < m; ++j) {
                    const double gij = g[i * m + j];
                    if (gij == 0.0)
                        continue;
                    const double* wj = wd + j * n;
                    for (std::size_t k = 0; k < n; ++k)
                        gxi[k] += gij * wj[k];
                }
            }
        }
    };
    std::vector<Var> inputs{x, weight};
    if (bias.valid())
        inputs.push_back(bias);
    return rec.push(std::move(out), std::move(inputs), std::move(backward), "dense");
}

Var add(ComputationRecord& rec, Var a, Var b)
{
    const Tensor& av = rec.value(a);
    const Tensor& bv = rec.value(b);
    require_same_shape(av, bv, "add");
    Tensor out = av;
    auto o = out.data();
    const auto bd = bv.data();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] += bd[i];
    auto backward = [a, b](ComputationRecord& r, const Tensor& gy) {
        if (r.requires_grad(a))
            accumulate(r.grad_buffer(a), gy);
        if (r.requires_grad(b))
            accumulate(r.grad_buffer(b), gy);
    };
    return rec.push(std::move(out), {a, b}, std::move(backward), "add");
}

Var mul(ComputationRecord& rec, Var a, Var b)
{
    const Tensor& av = rec.value(a);
    const Tensor& bv = rec.value(b);
    require_same_shape(av, bv, "mul");
    Tensor out = av;
    auto o = out.data();
    const auto bd = bv.data();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] *= bd[i];
    auto backward = [a, b](ComputationRecord& r, const Tensor& gy) {
        const auto g = gy.data();
        if (r.requires_grad(a)) {
            auto ga = r.grad_buffer(a).data();
            const auto bd = r.value(b).data();
            for (std::size_t i = 0; i < ga.size(); ++i)
                ga[i] += g[i] * bd[i];
        }
        if (r.requires_grad(b)) {
            auto gb = r.grad_buffer(b).data();
            const auto ad = r.value(a).data();
            for (std::size_t i = 0; i < gb.size(); ++i)
                gb[i] += g[i] * ad[i];
        }
    };
    return rec.push(std::move(out), {a, b}, std::move(backward), "mul");
}

Var scale(ComputationRecord& rec, Var x, double factor)
{
    Tensor out = rec.value(x);
    for (double& v : out.data())
        v *= factor;
    auto backward = [x, factor](ComputationRecord& r, const Tensor& gy) {
        auto gx = r.grad_buffer(x).data();
        const auto g = gy.data();
        for (std::size_t i = 0; i < gx.size(); ++i)
            gx[i] += factor * g[i];
    };
    return rec.push(std::move(out), {x}, std::move(backward), "scale");
}

Var sum(ComputationRecord& rec, Var x)
{
    double total = 0.0;
    for (double v : rec.value(x).data())
        total += v;
    auto backward = [x](ComputationRecord& r, const Tensor& gy) {
        const double g = gy[0];
        for (double& v : r.grad_buffer(x).data())
            v += g;
    };
    return rec.push(Tensor::scalar(total), {x}, std::move(backward), "sum");
}

Var reshape(ComputationRecord& rec, Var x, Shape shape)
{
    Tensor out = rec.value(x).reshaped(std::move(shape));
    auto backward = [x](ComputationRecord& r, const Tensor& gy) {
        accumulate(r.grad_buffer(x), gy);
    };
    return rec.push(std::move(out), {x}, std::move(backward), "reshape");
}

Var transpose_last(ComputationRecord& rec, Var x)
{
    const Tensor& xv = rec.value(x);
    if (xv.rank() != 3)
        throw ShapeError("transpose_last: expected B x M x N, got " + shape_string(xv.shape()));
    const std::size_t batch = xv.dim(0), rows = xv.dim(1), cols = xv.dim(2);
    Tensor out({batch, cols, rows});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                out.at(b, j, i) = xv.at(b, i, j);
    auto backward = [x, batch, rows, cols](ComputationRecord& r, const Tensor& gy) {
        Tensor& gx = r.grad_buffer(x);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j)
                    gx.at(b, i, j) += gy.at(b, j, i);
    };
    return rec.push(std::move(out), {x}, std::move(backward), "transpose");
}

Var concat_columns(ComputationRecord& rec, std::span<const Var> parts)
{
    if (parts.empty())
        throw ShapeError("concat_columns: no inputs");
    const std::size_t rows = rec.value(parts[0]).dim(0);
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (Var p : parts) {
        const Tensor& v = rec.value(p);
        if (v.rank() != 2 || v.dim(0) != rows)
            throw ShapeError("concat_columns: inputs must be N x a_i with equal N, got " +
                             shape_string(v.shape()));
        widths.push_back(v.dim(1));
        total += v.dim(1);
    }
    Tensor out({rows, total});
    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const Tensor& v = rec.value(parts[p]);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < widths[p]; ++j)
                out.at(i, offset + j) = v.at(i, j);
        offset += widths[p];
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    auto backward = [inputs, widths, rows, total](ComputationRecord& r, const Tensor& gy) {
        std::size_t offset = 0;
        for (std::size_t p = 0; p < inputs.size(); ++p) {
            if (r.requires_grad(inputs[p])) {
                Tensor& g = r.grad_buffer(inputs[p]);
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < widths[p]; ++j)
                        g.at(i, j) += gy[i * total + offset + j];
            }
            offset += widths[p];
        }
    };
    return rec.push(std::move(out), inputs, std::move(backward), "concat");
}

Var batched_matmul(ComputationRecord& rec, Var a, Var b, bool transpose_b)
{
    const Tensor& av = rec.value(a);
    const Tensor& bv = rec.value(b);
    if (av.rank() != 3 || bv.rank() != 3 || av.dim(0) != bv.dim(0))
        throw ShapeError("batched_matmul: expected B x M x K and B x K x N, got " +
                         shape_string(av.shape()) + " and " + shape_string(bv.shape()));
    const std::size_t batch = av.dim(0), m = av.dim(1), kdim = av.dim(2);
    const std::size_t n = transpose_b ? bv.dim(1) : bv.dim(2);
    if ((transpose_b ? bv.dim(2) : bv.dim(1)) != kdim)
        throw ShapeError("batched_matmul: inner dimensions differ: " + shape_string(av.shape()) +
                         " and " + shape_string(bv.shape()));
    Tensor out({batch, m, n});
    const double* ad = av.data().data();
    const double* bd = bv.data().data();
    double* od = out.data().data();
    // b laid out as K x N per batch item so every inner loop is contiguous.
    std::vector<double> bt;
    if (transpose_b)
        bt = transposed_blocks(bd, batch, n, kdim);
    const double* bkn = transpose_b ? bt.data() : bd;
    for (std::size_t bi = 0; bi < batch; ++bi) {
        const double* ab = ad + bi * m * kdim;
        const double* bb = bkn + bi * kdim * n;
        double* ob = od + bi * m * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double* arow = ab + i * kdim;
            double* orow = ob + i * n;
            for (std::size_t k = 0; k < kdim; ++k) {
                const double aik = arow[k];
                const double* brow = bb + k * n;
                for (std::size_t j = 0; j < n; ++j)
                    orow[j] += aik * brow[j];
            }
        }
    }
    auto backward = [a, b, batch, m, n, kdim, transpose_b](ComputationRecord& r, const Tensor& gy) {
        const double* g = gy.data().data();
        if (r.requires_grad(a)) {
            // da = g b^T needs b as N x K per batch item.
            const double* bd = r.value(b).data().data();
            std::vector<double> bt;
            if (!transpose_b)
                bt = transposed_blocks(bd, batch, kdim, n);
            const double* bnk = transpose_b ? bd : bt.data();
            double* ga = r.grad_buffer(a).data().data();
            for (std::size_t bi = 0; bi < batch; ++bi) {
                const double* bb = bnk + bi * n * kdim;
                for (std::size_t i = 0; i < m; ++i) {
                    double* garow = ga + (bi * m + i) * kdim;
                    const double* grow = g + (bi * m + i) * n;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double gij = grow[j];
                        const double* brow = bb + j * kdim;
                        for (std::size_t k = 0; k < kdim; ++k)
                            garow[k] += gij * brow[k];
                    }
                }
            }
        }
        if (r.requires_grad(b)) {
            const double* ad = r.value(a).data().data();
            double* gb = r.grad_buffer(b).data().data();
            for (std::size_t bi = 0; bi < batch; ++bi) {
                double* gbb = gb + bi * kdim * n;
                for (std::size_t i = 0; i < m; ++i) {
                    const double* arow = ad + (bi * m + i) * kdim;
                    const double* grow = g + (bi * m + i) * n;
                    if (transpose_b) {
                        for (std::size_t j = 0; j < n; ++j) {
                            const double gij = grow[j];
                            double* gbrow = gbb + j * kdim;
                            for (std::size_t k = 0; k < kdim; ++k)
                                gbrow[k] += gij * arow[k];
                        }
                    } else {
                        for (std::size_t k = 0; k < kdim; ++k) {
                            const double aik = arow[k];
                            double* gbrow = gbb + k * n;
                            for (std::size_t j = 0; j < n; ++j)
                                gbrow[j] += aik * grow[j];
                        }
                    }
                }
            }
        }
    };
    return rec.push(std::move(out), {a, b}, std::move(backward), "matmul");
}

Var gather_rows(ComputationRecord& rec, Var x, std::vector<std::size_t> rows)
{
    const Tensor& xv = rec.value(x);
    if (xv.rank() < 1)
        throw ShapeError("gather_rows: input needs a leading axis");
    const std::size_t extent = xv.dim(0);
    const std::size_t width = xv.size() / extent;
    for (std::size_t r : rows)
        if (r >= extent)
            throw ShapeError("gather_rows: row " + std::to_string(r) + " out of range for " +
                             shape_string(xv.shape()));
    Shape shape = xv.shape();
    shape[0] = rows.size();
    Tensor out(shape);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy_n(xv.data().begin() + static_cast<std::ptrdiff_t>(rows[i] * width), width,
                    out.data().begin() + static_cast<std::ptrdiff_t>(i * width));
    auto backward = [x, rows = std::move(rows), width](ComputationRecord& r, const Tensor& gy) {
        double* gx = r.grad_buffer(x).data().data();
        const double* g = gy.data().data();
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < width; ++j)
                gx[rows[i] * width + j] += g[i * width + j];
    };
    return rec.push(std::move(out), {x}, std::move(backward), "gather");
}

Var softmax(ComputationRecord& rec, Var x)
{
    const Tensor& xv = rec.value(x);
    const std::size_t width = xv.shape().back();
    const std::size_t rows = xv.size() / width;
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < rows; ++i) {
        auto row = deepg2p::softmax(xv.data().subspan(i * width, width));
        std::copy(row.begin(), row.end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * width));
    }
    // The output node is appended next, so its id is known up front.
    const Var self{rec.size()};
    auto backward = [x, self, rows, width](ComputationRecord& r, const Tensor& gy) {
        auto gx = r.grad_buffer(x).data();
        const auto p = r.value(self).data();
        const auto g = gy.data();
        for (std::size_t i = 0; i < rows; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < width; ++j)
                dot += g[i * width + j] * p[i * width + j];
            for (std::size_t j = 0; j < width; ++j)
                gx[i * width + j] += p[i * width + j] * (g[i * width + j] - dot);
        }
    };
    return rec.push(std::move(out), {x}, std::move(backward), "softmax");
}

Var dropout(ComputationRecord& rec, Var x, double rate, RngStream& rng, bool training)
{
    if (!(rate >= 0.0 && rate < 1.0))
        throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
    if (!training || rate == 0.0)
        return x;
    const Tensor& xv = rec.value(x);
    const double keep_scale = 1.0 / (1.0 - rate);
    auto mask = std::make_shared<std::vector<double>>(xv.size());
    for (double& m : *mask)
        m = rng.uniform() < rate ? 0.0 : keep_scale;
    Tensor out = xv;
    auto o = out.data();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] *= (*mask)[i];
    auto backward = [x, mask](ComputationRecord& r, const Tensor& gy) {
        auto gx = r.grad_buffer(x).data();
        const auto g = gy.data();
        for (std::size_t i = 0; i < gx.size(); ++i)
            gx[i] += g[i] * (*mask)[i];
    };
    return rec.push(std::move(out), {x}, std::move(backward), "dropout");
}

Var mse_loss(ComputationRecord& rec, Var prediction, Var target)
{
    const Tensor& pv = rec.value(prediction);
    const Tensor& tv = rec.value(target);
    if (pv.size() != tv.size())
        throw ShapeError("mse_loss: prediction " + shape_string(pv.shape()) + " vs target " +
                         shape_string(tv.shape()));
    const double loss = deepg2p::mse_loss(pv.data(), tv.data());
    auto backward = [prediction, target](ComputationRecord& r, const Tensor& gy) {
        const auto p = r.value(prediction).data();
        const auto t = r.value(target).data();
        const double factor = 2.0 * gy[0] / static_cast<double>(p.size());
        if (r.requires_grad(prediction)) {
            auto gp = r.grad_buffer(prediction).data();
            for (std::size_t i = 0; i < gp.size(); ++i)
                gp[i] += factor * (p[i] - t[i]);
        }
        if (r.requires_grad(target)) {
            auto gt = r.grad_buffer(target).data();
            for (std::size_t i = 0; i < gt.size(); ++i)
                gt[i] -= factor * (p[i] - t[i]);
        }
    };
    return rec.push(Tensor::scalar(loss), {prediction, target}, std::move(backward), "mse");
}

} // namespace deepg2p::ops
