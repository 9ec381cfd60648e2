#include "deepg2p/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace deepg2p {

std::uint64_t fnv1a64(std::string_view text, std::uint64_t basis)
{
    std::uint64_t h = basis;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
  : seed_(seed)
  , label_(label)
  , key_(splitmix64(seed ^ splitmix64(fnv1a64(label))))
{ }

std::uint64_t RngStream::next_u64()
{
    ++counter_;
    return splitmix64(key_ ^ splitmix64(counter_));
}

double RngStream::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

double RngStream::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::size_t RngStream::below(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("RngStream::below: n must be positive");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit)
        x = next_u64();
    return static_cast<std::size_t>(x % bound);
}

RngStream RngStream::fork(std::string_view sublabel) const
{
    std::string child = label_;
    child += '/';
    child += sublabel;
    return RngStream(seed_, child);
}

} // namespace deepg2p
