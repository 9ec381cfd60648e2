#include "deepg2p/encode.hpp"

#include "deepg2p/error.hpp"

#include <cmath>

namespace deepg2p {

namespace {

std::size_t base_row(char base)
{
    switch (base) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default:
        throw DataError("not a nucleotide: '" + std::string(1, base) + "'");
    }
}

void sinusoid_half(double value, std::size_t half, double* out)
{
    for (std::size_t j = 0; j < half; ++j) {
        const double i = static_cast<double>(j / 2);
        const double freq = std::pow(10000.0, -2.0 * i / static_cast<double>(half));
        out[j] = (j % 2 == 0) ? std::sin(value * freq) : std::cos(value * freq);
    }
}

} // namespace

std::array<char, 2> alleles(char letter)
{
    switch (letter) {
    case 'A': case 'C': case 'G': case 'T': return {letter, letter};
    case 'R': return {'A', 'G'};
    case 'Y': return {'C', 'T'};
    case 'S': return {'C', 'G'};
    case 'W': return {'A', 'T'};
    case 'K': return {'G', 'T'};
    case 'M': return {'A', 'C'};
    case 'N':
        throw DataError("missing genotype call 'N' must be resolved before encoding");
    default:
        throw DataError("unknown genotype letter '" + std::string(1, letter) + "'");
    }
}

std::array<double, kBases> encode_letter(char letter)
{
    const auto pair = alleles(letter);
    std::array<double, kBases> v{};
    v[base_row(pair[0])] += 0.5;
    v[base_row(pair[1])] += 0.5;
    return v;
}

Tensor build_context_matrix(const SnpDescriptor& snp, char call, std::size_t flank)
{
    const std::size_t width = 2 * flank + 1;
    if (snp.context.size() != width)
        throw DataError("snp '" + snp.id + "': context length " + std::to_string(snp.context.size()) +
                        " does not match window 2*" + std::to_string(flank) + "+1");
    Tensor m({kBases, width}, 0.0);
    for (std::size_t col = 0; col < width; ++col) {
        if (col == flank) {
            const auto center = encode_letter(call);
            for (std::size_t r = 0; r < kBases; ++r)
                m.at(r, col) = center[r];
        } else {
            m.at(base_row(snp.context[col]), col) = 1.0;
        }
    }
    return m;
}

Tensor positional_code(int chromosome, std::int64_t position, std::size_t dim)
{
    if (dim == 0 || dim % 2 != 0)
        throw ConfigError("positional code dimension must be positive and even, got " + std::to_string(dim));
    if (chromosome < 1)
        throw DataError("chromosome must be >= 1");
    if (position < 1)
        throw DataError("position must be >= 1");
    const std::size_t half = dim / 2;
    Tensor code({dim});
    sinusoid_half(static_cast<double>(chromosome - 1), half, code.data().data());
    sinusoid_half(static_cast<double>(position) * kPositionScale, half, code.data().data() + half);
    return code;
}

} // namespace deepg2p
