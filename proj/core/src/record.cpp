#include "deepg2p/record.hpp"

#include "deepg2p/error.hpp"

namespace deepg2p {

std::size_t ParameterStore::add(std::string name, Tensor value)
{
    if (contains(name))
        throw ConfigError("duplicate parameter name '" + name + "'");
    Tensor grad(value.shape(), 0.0);
    slots_.push_back({std::move(name), std::move(value), std::move(grad)});
    ++version_;
    return slots_.size() - 1;
}

std::size_t ParameterStore::index(std::string_view name) const
{
    for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i].name == name)
            return i;
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

bool ParameterStore::contains(std::string_view name) const
{
    for (const auto& slot : slots_)
        if (slot.name == name)
            return true;
    return false;
}

Tensor& ParameterStore::mutable_value(std::size_t slot)
{
    ++version_;
    return slots_.at(slot).value;
}

void ParameterStore::zero_grad()
{
    for (auto& slot : slots_)
        slot.grad.fill(0.0);
}

std::size_t ParameterStore::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& slot : slots_)
        n += slot.value.size();
    return n;
}

ComputationRecord::ComputationRecord(ParameterStore* params)
  : params_(params)
  , params_version_(params ? params->version() : 0)
{ }

const ComputationRecord::Node& ComputationRecord::node(Var v) const
{
    if (v.id >= nodes_.size())
        throw NumericError("variable does not belong to this computation record");
    return nodes_[v.id];
}

ComputationRecord::Node& ComputationRecord::node(Var v)
{
    if (v.id >= nodes_.size())
        throw NumericError("variable does not belong to this computation record");
    return nodes_[v.id];
}

Var ComputationRecord::constant(Tensor value, std::string_view op)
{
    Node n;
    n.value = std::move(value);
    n.op = op;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var ComputationRecord::parameter(std::size_t slot)
{
    if (!params_)
        throw ConfigError("computation record has no parameter store");
    Node n;
    n.value = params_->value(slot);
    n.op = "param:" + params_->name(slot);
    n.slot = slot;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var ComputationRecord::parameter(std::string_view name)
{
    if (!params_)
        throw ConfigError("computation record has no parameter store");
    return parameter(params_->index(name));
}

const Tensor& ComputationRecord::value(Var v) const
{
    return node(v).value;
}

bool ComputationRecord::requires_grad(Var v) const
{
    return node(v).requires_grad;
}

const Tensor& ComputationRecord::grad(Var v) const
{
    return node(v).grad;
}

Tensor& ComputationRecord::grad_buffer(Var v)
{
    Node& n = node(v);
    if (n.grad.empty())
        n.grad = Tensor(n.value.shape(), 0.0);
    return n.grad;
}

const std::string& ComputationRecord::op_name(Var v) const
{
    return node(v).op;
}

void ComputationRecord::push_scope(std::string_view name)
{
    scope_marks_.push_back(scope_.size());
    if (!scope_.empty())
        scope_ += '/';
    scope_ += name;
}

void ComputationRecord::pop_scope()
{
    if (scope_marks_.empty())
        return;
    scope_.resize(scope_marks_.back());
    scope_marks_.pop_back();
}

Var ComputationRecord::push(Tensor value, std::vector<Var> inputs, BackwardFn backward,
                            std::string_view op)
{
    std::string label = scope_.empty() ? std::string(op) : scope_ + "/" + std::string(op);
    if (!value.all_finite())
        throw NumericError("non-finite value produced by " + label);
    Node n;
    n.value = std::move(value);
    for (Var in : inputs)
        n.requires_grad = n.requires_grad || node(in).requires_grad;
    n.inputs = std::move(inputs);
    if (n.requires_grad)
        n.backward = std::move(backward);
    n.op = std::move(label);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

void ComputationRecord::backward(Var loss)
{
    const Node& root = node(loss);
    if (root.value.size() != 1)
        throw NumericError("backward: loss must be a scalar, got " + shape_string(root.value.shape()));
    if (params_ && params_->version() != params_version_)
        throw NumericError("backward: record replay mismatch (parameters changed after the forward pass)");
    if (backward_done_)
        throw NumericError("backward: record already differentiated");
    backward_done_ = true;

    grad_buffer(loss).fill(1.0);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.grad.empty() || !n.requires_grad || !n.backward)
            continue;
        // No nodes are appended during backward, so the reference stays valid.
        n.backward(*this, n.grad);
    }

    if (!params_)
        return;
    params_->zero_grad();
    for (const Node& n : nodes_) {
        if (!n.slot || n.grad.empty())
            continue;
        Tensor& g = params_->grad(*n.slot);
        auto src = n.grad.data();
        auto dst = g.data();
        for (std::size_t k = 0; k < dst.size(); ++k)
            dst[k] += src[k];
    }
}

} // namespace deepg2p
