#pragma once

#include "deepg2p/tensor.hpp"

#include <span>
#include <vector>

namespace deepg2p {

/// Valid (unpadded) 1-D cross-correlation.
///
/// input is C_in x L or N x C_in x L, kernels C_out x C_in x k, bias C_out.
/// out[c,t] = bias[c] + sum_{i,j} kernels[c,i,j] * input[i,t+j]
Tensor conv1d_valid(const Tensor& input, const Tensor& kernels, const Tensor& bias);

struct MaxResult {
    Tensor values;
    /// Flat index into the reduced axis for every output element.
    std::vector<std::size_t> argmax;
};

/// Max along one axis; ties resolve to the first maximal index.
MaxResult reduce_max(const Tensor& input, std::size_t axis);

/// Max over the last (time) axis of a C x L or N x C x L tensor.
MaxResult maxpool_over_time(const Tensor& input);

/// Numerically stable softmax (max subtraction). Throws on non-finite input.
std::vector<double> softmax(std::span<const double> scores);

/// Affine map. input is n or N x n, weight m x n, bias m (or empty).
Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& input);

double mse_loss(std::span<const double> prediction, std::span<const double> target);

} // namespace deepg2p
