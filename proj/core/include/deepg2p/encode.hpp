#pragma once

#include "deepg2p/tables.hpp"
#include "deepg2p/tensor.hpp"

#include <array>
#include <cstdint>

namespace deepg2p {

inline constexpr std::size_t kBases = 4; // rows ordered A, C, G, T
inline constexpr double kPositionScale = 1e-4;

/// One-hot over (A,C,G,T); heterozygous IUPAC codes split 0.5/0.5.
/// N and anything outside the ten resolved letters throw DataError.
std::array<double, kBases> encode_letter(char letter);

/// The two alleles of a resolved call (equal for homozygous letters).
std::array<char, 2> alleles(char letter);

/// 4 x (2w+1): flanks one-hot from the reference context, center = the call.
Tensor build_context_matrix(const SnpDescriptor& snp, char call, std::size_t flank);

/// Sinusoidal code of length d: first half encodes (chromosome - 1), second
/// half encodes position * 1e-4. Each half alternates sin/cos with
/// frequency 10000^(-2i/(d/2)).
Tensor positional_code(int chromosome, std::int64_t position, std::size_t dim);

} // namespace deepg2p
