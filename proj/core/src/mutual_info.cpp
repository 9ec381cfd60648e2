#include "deepg2p/mutual_info.hpp"

#include "deepg2p/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace deepg2p {

std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins)
{
    const std::size_t n = values.size();
    if (n == 0)
        throw DataError("quantile_bins: empty input");
    if (bins == 0)
        throw ConfigError("quantile_bins: bins must be positive");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<std::size_t> out(n);
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start + 1;
        while (end < n && values[order[end]] == values[order[start]])
            ++end;
        // Twice the mid-rank keeps the arithmetic in integers.
        const std::size_t twice_mid = start + end - 1;
        const std::size_t bin = std::min(bins - 1, twice_mid * bins / (2 * n));
        for (std::size_t k = start; k < end; ++k)
            out[order[k]] = bin;
        start = end;
    }
    return out;
}

double mutual_information_discrete(std::span<const int> a, std::span<const std::size_t> b)
{
    if (a.size() != b.size())
        throw ShapeError("mutual_information: label arrays differ in length");
    if (a.empty())
        throw DataError("mutual_information: empty input");
    std::map<int, std::size_t> a_index;
    for (int v : a)
        a_index.emplace(v, 0);
    std::size_t k = 0;
    for (auto& [value, idx] : a_index)
        idx = k++;
    const std::size_t nb = *std::max_element(b.begin(), b.end()) + 1;

    std::vector<double> joint(a_index.size() * nb, 0.0);
    std::vector<double> pa(a_index.size(), 0.0);
    std::vector<double> pb(nb, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t ai = a_index[a[i]];
        joint[ai * nb + b[i]] += 1.0;
        pa[ai] += 1.0;
        pb[b[i]] += 1.0;
    }
    const double n = static_cast<double>(a.size());
    double mi = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            const double c = joint[i * nb + j];
            if (c > 0.0)
                mi += (c / n) * std::log(c * n / (pa[i] * pb[j]));
        }
    // Plug-in MI is nonnegative; clamp roundoff.
    return std::max(0.0, mi);
}

double mutual_information(std::span<const int> classes, std::span<const double> target, std::size_t bins)
{
    if (classes.empty() || target.empty())
        throw DataError("mutual_information: empty input");
    if (classes.size() != target.size())
        throw ShapeError("mutual_information: classes and target differ in length");
    if (target.size() < bins)
        throw DataError("mutual_information: need at least " + std::to_string(bins) + " samples, got " +
                        std::to_string(target.size()));
    const auto binned = quantile_bins(target, bins);
    return mutual_information_discrete(classes, binned);
}

} // namespace deepg2p
