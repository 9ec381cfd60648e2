#pragma once

#include "deepg2p/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepg2p {

/// Named parameter slots, each with a gradient slot of identical shape.
class ParameterStore {
public:
    std::size_t add(std::string name, Tensor value);

    std::size_t size() const { return slots_.size(); }
    std::size_t index(std::string_view name) const;
    bool contains(std::string_view name) const;

    const std::string& name(std::size_t slot) const { return slots_.at(slot).name; }
    const Tensor& value(std::size_t slot) const { return slots_.at(slot).value; }
    const Tensor& grad(std::size_t slot) const { return slots_.at(slot).grad; }
    Tensor& grad(std::size_t slot) { return slots_.at(slot).grad; }
    /// Mutable access bumps the version so stale records are detected.
    Tensor& mutable_value(std::size_t slot);

    void zero_grad();
    std::size_t parameter_count() const;
    std::uint64_t version() const { return version_; }

private:
    struct Slot {
        std::string name;
        Tensor value;
        Tensor grad;
    };
    std::vector<Slot> slots_;
    std::uint64_t version_ = 0;
};

struct Var {
    static constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::size_t id = none;
    bool valid() const { return id != none; }
};

class ComputationRecord;
using BackwardFn = std::function<void(ComputationRecord&, const Tensor& out_grad)>;

/// Tape of primitive applications for reverse-mode differentiation.
///
/// Every node keeps its output value; gradients are allocated on demand during
/// backward(). Parameters enter through parameter(), which links the node to a
/// ParameterStore slot. Nodes that do not depend on any parameter never get a
/// gradient computed. A record is single-owner; build a fresh one per batch.
class ComputationRecord {
public:
    explicit ComputationRecord(ParameterStore* params = nullptr);

    Var constant(Tensor value, std::string_view op = "constant");
    Var parameter(std::size_t slot);
    Var parameter(std::string_view name);

    const Tensor& value(Var v) const;
    bool requires_grad(Var v) const;
    /// Gradient accumulated so far (empty tensor if the node received none).
    const Tensor& grad(Var v) const;
    /// Gradient buffer of an input, zero-initialized on first access.
    Tensor& grad_buffer(Var v);

    /// Append an op node. Throws NumericError naming the scope and op if the
    /// value holds NaN or Inf.
    Var push(Tensor value, std::vector<Var> inputs, BackwardFn backward, std::string_view op);

    /// Seeds d(loss)/d(loss) = 1 and propagates to every node. Parameter
    /// gradients in the store are overwritten (slots unreachable from the loss
    /// receive zeros).
    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }
    const std::string& op_name(Var v) const;
    ParameterStore* parameters() const { return params_; }

    void push_scope(std::string_view name);
    void pop_scope();
    const std::string& scope() const { return scope_; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<Var> inputs;
        BackwardFn backward;
        std::string op;
        std::optional<std::size_t> slot;
        bool requires_grad = false;
    };

    const Node& node(Var v) const;
    Node& node(Var v);

    ParameterStore* params_;
    std::uint64_t params_version_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::size_t> scope_marks_;
    std::string scope_;
    bool backward_done_ = false;
};

/// RAII scope label used in non-finite diagnostics ("weather/conv1/conv1d").
class ScopedLabel {
public:
    ScopedLabel(ComputationRecord& rec, std::string_view name)
      : rec_(rec)
    {
        rec_.push_scope(name);
    }
    ~ScopedLabel() { rec_.pop_scope(); }
    ScopedLabel(const ScopedLabel&) = delete;
    ScopedLabel& operator=(const ScopedLabel&) = delete;

private:
    ComputationRecord& rec_;
};

} // namespace deepg2p
