#include "deepg2p/adam.hpp"

#include "deepg2p/error.hpp"

#include <cmath>

namespace deepg2p {

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, OptimizerState& state)
{
    if (params.size() != grads.size())
        throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    if (state.first_moment.empty()) {
        for (const Tensor& p : params) {
            state.first_moment.emplace_back(p.shape(), 0.0);
            state.second_moment.emplace_back(p.shape(), 0.0);
        }
    }
    if (state.first_moment.size() != params.size())
        throw ShapeError("adam_step: optimizer state tracks a different parameter count");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (params[i].shape() != grads[i].shape() || params[i].shape() != state.first_moment[i].shape())
            throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(i));

    const AdamConfig& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].data();
        const auto g = grads[i].data();
        auto m = state.first_moment[i].data();
        auto v = state.second_moment[i].data();
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
            v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
            const double m_hat = m[k] / correction1;
            const double v_hat = v[k] / correction2;
            p[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

Adam::Adam(AdamConfig config)
{
    state_.config = config;
}

void Adam::step(ParameterStore& params)
{
    std::vector<Tensor> values;
    std::vector<Tensor> grads;
    values.reserve(params.size());
    grads.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        values.push_back(params.value(i));
        grads.push_back(params.grad(i));
    }
    adam_step(values, grads, state_);
    for (std::size_t i = 0; i < params.size(); ++i)
        params.mutable_value(i) = std::move(values[i]);
}

} // namespace deepg2p
