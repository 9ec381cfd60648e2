#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace deepg2p {

/// Quantile bin of every sample: bin = floor(midrank * bins / n), where tied
/// values share the mid-rank of their tie group (so equal values share a bin).
std::vector<std::size_t> quantile_bins(std::span<const double> values, std::size_t bins);

/// Plug-in mutual information (nats) between two discrete labelings.
double mutual_information_discrete(std::span<const int> a, std::span<const std::size_t> b);

/// MI between categorical classes and a continuous target discretized into
/// `bins` quantile bins. Requires at least `bins` samples.
double mutual_information(std::span<const int> classes, std::span<const double> target, std::size_t bins = 16);

} // namespace deepg2p
