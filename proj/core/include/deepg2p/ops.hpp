#pragma once

#include "deepg2p/record.hpp"
#include "deepg2p/rng.hpp"

#include <span>
#include <vector>

// Differentiable primitives recorded on a ComputationRecord. Shapes follow the
// forward kernels in kernels.hpp; leading axes are batch axes.
namespace deepg2p::ops {

/// input N x C_in x L, kernels C_out x C_in x k, bias C_out -> N x C_out x (L-k+1)
Var conv1d(ComputationRecord& rec, Var input, Var kernels, Var bias);
Var relu(ComputationRecord& rec, Var x);
/// Max over one axis; gradient routes to the first maximal index.
Var reduce_max(ComputationRecord& rec, Var x, std::size_t axis);
Var maxpool_over_time(ComputationRecord& rec, Var x);
/// x N x n, weight m x n, optional bias m -> N x m
Var dense(ComputationRecord& rec, Var x, Var weight, Var bias = {});
Var add(ComputationRecord& rec, Var a, Var b);
Var mul(ComputationRecord& rec, Var a, Var b);
Var scale(ComputationRecord& rec, Var x, double factor);
Var sum(ComputationRecord& rec, Var x);
Var reshape(ComputationRecord& rec, Var x, Shape shape);
/// B x M x N -> B x N x M
Var transpose_last(ComputationRecord& rec, Var x);
/// Concatenate N x a_i matrices along columns.
Var concat_columns(ComputationRecord& rec, std::span<const Var> parts);
/// a B x M x K times b (B x K x N, or B x N x K when transpose_b) -> B x M x N
Var batched_matmul(ComputationRecord& rec, Var a, Var b, bool transpose_b);
/// Rows of x (leading axis) picked by index; repeated rows accumulate gradient.
Var gather_rows(ComputationRecord& rec, Var x, std::vector<std::size_t> rows);
/// Softmax over the last axis.
Var softmax(ComputationRecord& rec, Var x);
/// Inverted dropout: kept values scaled by 1/(1-rate); identity when !training.
Var dropout(ComputationRecord& rec, Var x, double rate, RngStream& rng, bool training);
/// Mean squared error between same-sized tensors -> scalar.
Var mse_loss(ComputationRecord& rec, Var prediction, Var target);

} // namespace deepg2p::ops
