#pragma once

#include "deepg2p/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace deepg2p {

struct GbdtConfig {
    std::size_t trees = 100;
    std::size_t max_leaves = 31;
    std::size_t max_depth = 6;
    double shrinkage = 0.1;
    std::size_t min_samples_leaf = 20;
    std::size_t max_bins = 255;
};

struct TreeNode {
    /// Column index into the full feature matrix; -1 marks a leaf.
    std::int64_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> row) const;
};

/// Per-feature binning of a dense n x p matrix (feature-major bin codes).
class BinnedMatrix {
public:
    static BinnedMatrix build(const Tensor& x, std::size_t max_bins);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cuts_.size(); }
    std::size_t bins(std::size_t col) const { return cuts_[col].size() + 1; }
    /// Split "bin <= b" is equivalent to "value <= cuts(col)[b]".
    const std::vector<double>& cuts(std::size_t col) const { return cuts_[col]; }
    std::span<const std::uint16_t> codes(std::size_t col) const
    {
        return {codes_.data() + col * rows_, rows_};
    }

private:
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> cuts_;
    std::vector<std::uint16_t> codes_;
};

/// Least-squares gradient boosting with leaf-wise trees.
///
/// prediction = base_value + shrinkage * sum of tree outputs. gain[i] is the
/// realized training squared-error reduction credited to splits on features[i]
/// (each split contributes shrinkage*(2-shrinkage) times its SSE gain), so the
/// gains sum to the total reduction from the constant-mean model.
struct GbdtModel {
    double base_value = 0.0;
    double shrinkage = 0.1;
    std::vector<RegressionTree> trees;
    /// Columns the model was fit on; importance vectors align with this list.
    std::vector<std::size_t> features;
    std::vector<std::size_t> split_count;
    std::vector<double> gain;
    /// Training MSE of the base model followed by the MSE after each tree.
    std::vector<double> training_mse;

    double predict(std::span<const double> row) const;
    std::vector<double> predict(const Tensor& x) const;
};

GbdtModel fit_gbdt(const Tensor& x, std::span<const double> y, const GbdtConfig& config = {});
/// Fit on a subset of columns of a pre-binned matrix.
GbdtModel fit_gbdt(const BinnedMatrix& x, std::span<const std::size_t> columns, std::span<const double> y,
                   const GbdtConfig& config = {});

struct RfeResult {
    /// Surviving columns ordered by final gain (descending), ties by column.
    std::vector<std::size_t> selected;
    /// Surviving columns after every elimination round (input order).
    std::vector<std::vector<std::size_t>> rounds;
    /// Importances from the final fit, aligned with `selected`.
    std::vector<double> gain;
    std::vector<std::size_t> split_count;
};

/// Recursive feature elimination: fit, drop the lowest-gain ceil(step * m)
/// features (never going below target), repeat until exactly target remain.
RfeResult rfe_select(const Tensor& x, std::span<const double> y, std::size_t target,
                     const GbdtConfig& config = {}, double step_fraction = 0.1);

} // namespace deepg2p
