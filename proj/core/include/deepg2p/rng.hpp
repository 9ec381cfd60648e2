#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace deepg2p {

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based random stream keyed by (seed, label).
///
/// Draw i of a stream is a pure function of (seed, label, i), so the sequence
/// is identical on every platform and independent of how many other streams
/// exist or in which order they are consumed. Distributions are implemented
/// here rather than taken from <random>, whose distributions are
/// implementation-defined.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller (both variates used).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Independent child stream; label becomes "<label>/<sublabel>".
    RngStream fork(std::string_view sublabel) const;

    std::uint64_t seed() const { return seed_; }
    const std::string& label() const { return label_; }
    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t seed_;
    std::string label_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace deepg2p
