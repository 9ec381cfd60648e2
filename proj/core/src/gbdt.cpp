#include "deepg2p/gbdt.hpp"

#include "deepg2p/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace deepg2p {

double RegressionTree::predict(std::span<const double> row) const
{
    std::size_t node = 0;
    while (nodes[node].feature >= 0) {
        const TreeNode& n = nodes[node];
        node = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[node].value;
}

double GbdtModel::predict(std::span<const double> row) const
{
    double acc = 0.0;
    for (const auto& tree : trees)
        acc += tree.predict(row);
    return base_value + shrinkage * acc;
}

std::vector<double> GbdtModel::predict(const Tensor& x) const
{
    if (x.rank() != 2)
        throw ShapeError("GbdtModel::predict: expected n x p matrix");
    std::vector<double> out(x.dim(0));
    const std::size_t p = x.dim(1);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = predict(x.data().subspan(i * p, p));
    return out;
}

BinnedMatrix BinnedMatrix::build(const Tensor& x, std::size_t max_bins)
{
    if (x.rank() != 2)
        throw ShapeError("BinnedMatrix: expected n x p matrix, got " + shape_string(x.shape()));
    if (max_bins < 2 || max_bins > 65535)
        throw ConfigError("max_bins must lie in [2, 65535]");
    BinnedMatrix m;
    m.rows_ = x.dim(0);
    const std::size_t p = x.dim(1);
    m.cuts_.resize(p);
    m.codes_.resize(p * m.rows_);
    std::vector<double> column(m.rows_);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < m.rows_; ++i) {
            column[i] = x.at(i, j);
            if (!std::isfinite(column[i]))
                throw NumericError("gbdt: non-finite feature value at row " + std::to_string(i) + ", column " +
                                   std::to_string(j));
        }
        std::vector<double> distinct = column;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        auto& cuts = m.cuts_[j];
        if (distinct.size() <= max_bins) {
            for (std::size_t k = 1; k < distinct.size(); ++k)
                cuts.push_back(0.5 * (distinct[k - 1] + distinct[k]));
        } else {
            // Equal counts of distinct values per bin.
            for (std::size_t b = 1; b < max_bins; ++b) {
                const std::size_t k = b * distinct.size() / max_bins;
                cuts.push_back(0.5 * (distinct[k - 1] + distinct[k]));
            }
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        }
        auto* codes = m.codes_.data() + j * m.rows_;
        for (std::size_t i = 0; i < m.rows_; ++i)
            codes[i] = static_cast<std::uint16_t>(std::lower_bound(cuts.begin(), cuts.end(), column[i]) - cuts.begin());
    }
    return m;
}

namespace {

struct HistBin {
    double sum = 0.0;
    std::uint32_t count = 0;
};

struct Split {
    double gain = 0.0;
    std::size_t column_pos = 0;
    std::uint16_t bin = 0;
    bool valid = false;
};

struct Leaf {
    std::vector<std::uint32_t> rows;
    std::vector<HistBin> hist;
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t depth = 0;
    std::int32_t node = 0;
    Split best;
};

class TreeGrower {
public:
    TreeGrower(const BinnedMatrix& x, std::span<const std::size_t> columns, const GbdtConfig& config)
      : x_(x)
      , columns_(columns)
      , config_(config)
    {
        offsets_.resize(columns.size() + 1, 0);
        for (std::size_t j = 0; j < columns.size(); ++j)
            offsets_[j + 1] = offsets_[j] + x.bins(columns[j]);
    }

    RegressionTree grow(std::span<double> residual, GbdtModel& model)
    {
        const double gain_scale = config_.shrinkage * (2.0 - config_.shrinkage);
        RegressionTree tree;
        tree.nodes.emplace_back();

        std::vector<Leaf> leaves(1);
        Leaf& root = leaves[0];
        root.rows.resize(x_.rows());
        std::iota(root.rows.begin(), root.rows.end(), 0u);
        fill_stats(root, residual);
        build_hist(root, residual);
        find_split(root);

        while (leaves.size() < config_.max_leaves) {
            std::size_t pick = leaves.size();
            for (std::size_t l = 0; l < leaves.size(); ++l)
                if (leaves[l].best.valid && (pick == leaves.size() || leaves[l].best.gain > leaves[pick].best.gain))
                    pick = l;
            if (pick == leaves.size())
                break;

            Leaf parent = std::move(leaves[pick]);
            const std::size_t col = columns_[parent.best.column_pos];
            const auto codes = x_.codes(col);
            Leaf left;
            Leaf right;
            for (std::uint32_t r : parent.rows)
                (codes[r] <= parent.best.bin ? left.rows : right.rows).push_back(r);
            left.depth = right.depth = parent.depth + 1;
            fill_stats(left, residual);
            fill_stats(right, residual);
            Leaf& small = left.rows.size() <= right.rows.size() ? left : right;
            Leaf& large = left.rows.size() <= right.rows.size() ? right : left;
            build_hist(small, residual);
            large.hist = std::move(parent.hist);
            for (std::size_t b = 0; b < large.hist.size(); ++b) {
                large.hist[b].sum -= small.hist[b].sum;
                large.hist[b].count -= small.hist[b].count;
            }

            TreeNode& node = tree.nodes[static_cast<std::size_t>(parent.node)];
            node.feature = static_cast<std::int64_t>(col);
            node.threshold = x_.cuts(col)[parent.best.bin];
            node.left = static_cast<std::int32_t>(tree.nodes.size());
            node.right = static_cast<std::int32_t>(tree.nodes.size() + 1);
            left.node = node.left;
            right.node = node.right;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();

            model.gain[parent.best.column_pos] += gain_scale * parent.best.gain;
            model.split_count[parent.best.column_pos] += 1;

            find_split(left);
            find_split(right);
            leaves[pick] = std::move(left);
            leaves.push_back(std::move(right));
        }

        for (const Leaf& leaf : leaves) {
            const double value = leaf.sum / static_cast<double>(leaf.rows.size());
            tree.nodes[static_cast<std::size_t>(leaf.node)].value = value;
            const double step = config_.shrinkage * value;
            for (std::uint32_t r : leaf.rows)
                residual[r] -= step;
        }
        return tree;
    }

private:
    void fill_stats(Leaf& leaf, std::span<const double> residual) const
    {
        leaf.sum = 0.0;
        leaf.sum_sq = 0.0;
        for (std::uint32_t r : leaf.rows) {
            leaf.sum += residual[r];
            leaf.sum_sq += residual[r] * residual[r];
        }
    }

    void build_hist(Leaf& leaf, std::span<const double> residual) const
    {
        leaf.hist.assign(offsets_.back(), HistBin{});
        for (std::size_t j = 0; j < columns_.size(); ++j) {
            const auto codes = x_.codes(columns_[j]);
            HistBin* h = leaf.hist.data() + offsets_[j];
            for (std::uint32_t r : leaf.rows) {
                HistBin& bin = h[codes[r]];
                bin.sum += residual[r];
                bin.count += 1;
            }
        }
    }

    void find_split(Leaf& leaf) const
    {
        leaf.best = Split{};
        const std::size_t n = leaf.rows.size();
        if (leaf.depth >= config_.max_depth || n < 2 * config_.min_samples_leaf || n < 2)
            return;
        const double total = leaf.sum;
        const double nd = static_cast<double>(n);
        const double parent_term = total * total / nd;
        const double node_sse = leaf.sum_sq - parent_term;
        if (!(node_sse > 0.0))
            return;
        const std::size_t min_leaf = std::max<std::size_t>(1, config_.min_samples_leaf);
        for (std::size_t j = 0; j < columns_.size(); ++j) {
            const HistBin* h = leaf.hist.data() + offsets_[j];
            const std::size_t nbins = offsets_[j + 1] - offsets_[j];
            double left_sum = 0.0;
            std::size_t left_n = 0;
            for (std::size_t b = 0; b + 1 < nbins; ++b) {
                left_sum += h[b].sum;
                left_n += h[b].count;
                if (left_n < min_leaf)
                    continue;
                const std::size_t right_n = n - left_n;
                if (right_n < min_leaf)
                    break;
                const double right_sum = total - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                                    right_sum * right_sum / static_cast<double>(right_n) - parent_term;
                if (gain > leaf.best.gain) {
                    leaf.best.gain = gain;
                    leaf.best.column_pos = j;
                    leaf.best.bin = static_cast<std::uint16_t>(b);
                    leaf.best.valid = true;
                }
            }
        }
        // Gains at roundoff level of the node's own SSE are not real structure.
        if (leaf.best.valid && leaf.best.gain <= 1e-10 * node_sse)
            leaf.best = Split{};
    }

    const BinnedMatrix& x_;
    std::span<const std::size_t> columns_;
    const GbdtConfig& config_;
    std::vector<std::size_t> offsets_;
};

void check_config(const GbdtConfig& config)
{
    if (config.max_leaves < 1 || config.max_depth < 1)
        throw ConfigError("gbdt: max_leaves and max_depth must be positive");
    if (!(config.shrinkage > 0.0 && config.shrinkage <= 1.0))
        throw ConfigError("gbdt: shrinkage must lie in (0, 1]");
}

} // namespace

GbdtModel fit_gbdt(const BinnedMatrix& x, std::span<const std::size_t> columns, std::span<const double> y,
                   const GbdtConfig& config)
{
    check_config(config);
    const std::size_t n = x.rows();
    if (y.size() != n)
        throw ShapeError("fit_gbdt: " + std::to_string(y.size()) + " targets for " + std::to_string(n) + " rows");
    if (n < 2)
        throw DataError("fit_gbdt: need at least 2 samples");
    for (double v : y)
        if (!std::isfinite(v))
            throw NumericError("fit_gbdt: non-finite target");
    for (std::size_t c : columns)
        if (c >= x.cols())
            throw ShapeError("fit_gbdt: column " + std::to_string(c) + " out of range");

    GbdtModel model;
    model.shrinkage = config.shrinkage;
    model.features.assign(columns.begin(), columns.end());
    model.split_count.assign(columns.size(), 0);
    model.gain.assign(columns.size(), 0.0);

    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
        model.base_value = y[0];
        model.training_mse.push_back(0.0);
        return model;
    }

    model.base_value = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i)
        residual[i] = y[i] - model.base_value;
    auto mse = [&] {
        double s = 0.0;
        for (double r : residual)
            s += r * r;
        return s / static_cast<double>(n);
    };
    model.training_mse.push_back(mse());

    TreeGrower grower(x, columns, config);
    for (std::size_t t = 0; t < config.trees; ++t) {
        model.trees.push_back(grower.grow(residual, model));
        model.training_mse.push_back(mse());
    }
    return model;
}

GbdtModel fit_gbdt(const Tensor& x, std::span<const double> y, const GbdtConfig& config)
{
    BinnedMatrix binned = BinnedMatrix::build(x, config.max_bins);
    std::vector<std::size_t> columns(binned.cols());
    std::iota(columns.begin(), columns.end(), std::size_t{0});
    return fit_gbdt(binned, columns, y, config);
}

RfeResult rfe_select(const Tensor& x, std::span<const double> y, std::size_t target, const GbdtConfig& config,
                     double step_fraction)
{
    if (x.rank() != 2)
        throw ShapeError("rfe_select: expected n x p matrix");
    const std::size_t p = x.dim(1);
    if (target == 0 || target > p)
        throw DataError("rfe_select: target " + std::to_string(target) + " must lie in [1, " + std::to_string(p) + "]");
    if (!(step_fraction > 0.0 && step_fraction <= 1.0))
        throw ConfigError("rfe_select: step fraction must lie in (0, 1]");

    const BinnedMatrix binned = BinnedMatrix::build(x, config.max_bins);
    std::vector<std::size_t> remaining(p);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    RfeResult result;
    while (true) {
        GbdtModel model = fit_gbdt(binned, remaining, y, config);
        std::vector<std::size_t> order(remaining.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (model.gain[a] != model.gain[b])
                return model.gain[a] > model.gain[b];
            return remaining[a] < remaining[b];
        });
        const std::size_t m = remaining.size();
        if (m == target) {
            for (std::size_t pos : order) {
                result.selected.push_back(remaining[pos]);
                result.gain.push_back(model.gain[pos]);
                result.split_count.push_back(model.split_count[pos]);
            }
            return result;
        }
        const std::size_t step = static_cast<std::size_t>(std::ceil(step_fraction * static_cast<double>(m)));
        const std::size_t drop = std::min(std::max<std::size_t>(step, 1), m - target);
        std::vector<std::size_t> keep;
        keep.reserve(m - drop);
        for (std::size_t k = 0; k < m - drop; ++k)
            keep.push_back(remaining[order[k]]);
        std::sort(keep.begin(), keep.end());
        remaining = std::move(keep);
        result.rounds.push_back(remaining);
    }
}

} // namespace deepg2p
