#pragma once

#include "deepg2p/record.hpp"
#include "deepg2p/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace deepg2p {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    AdamConfig config;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
    std::uint64_t step = 0;
};

/// One Adam update with bias correction. Moments are created on the first
/// call; later calls require matching shapes.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, OptimizerState& state);

/// Adam applied to every slot of a store, reading the store's gradients.
class Adam {
public:
    explicit Adam(AdamConfig config = {});
    void step(ParameterStore& params);
    const OptimizerState& state() const { return state_; }

private:
    OptimizerState state_;
};

} // namespace deepg2p
