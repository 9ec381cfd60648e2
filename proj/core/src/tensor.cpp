#include "deepg2p/tensor.hpp"

#include "deepg2p/error.hpp"

#include <algorithm>
#include <cmath>

namespace deepg2p {

std::size_t shape_size(const Shape& shape)
{
    std::size_t n = 1;
    for (std::size_t extent : shape)
        n *= extent;
    return n;
}

std::string shape_string(const Shape& shape)
{
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i)
            out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

namespace {

void check_extents(const Shape& shape)
{
    if (shape.empty())
        throw ShapeError("tensor shape must have at least one axis");
    for (std::size_t extent : shape)
        if (extent == 0)
            throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
}

} // namespace

Tensor::Tensor(Shape shape, double fill)
  : shape_(std::move(shape))
{
    check_extents(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
  : shape_(std::move(shape))
  , data_(std::move(values))
{
    check_extents(shape_);
    if (data_.size() != shape_size(shape_))
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
}

Tensor Tensor::vector(std::vector<double> values)
{
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows)
{
    std::size_t cols = rows.size() ? rows.begin()->size() : 0;
    std::vector<double> values;
    for (const auto& row : rows) {
        if (row.size() != cols)
            throw ShapeError("ragged matrix literal");
        values.insert(values.end(), row.begin(), row.end());
    }
    return Tensor({rows.size(), cols}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const
{
    if (axis >= shape_.size())
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape_));
    return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const
{
    if (shape_size(shape) != data_.size())
        throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value)
{
    std::fill(data_.begin(), data_.end(), value);
}

bool Tensor::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

} // namespace deepg2p
