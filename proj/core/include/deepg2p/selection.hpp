#pragma once

#include "deepg2p/gbdt.hpp"
#include "deepg2p/tables.hpp"
#include "deepg2p/tensor.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace deepg2p {

/// 0 = homozygous reference, 1 = heterozygous carrying the reference, 2 otherwise.
int snp_dosage(char call, char reference_base);

/// Dosage matrix of the given hybrid rows, n x p over every SNP of the table.
Tensor dosage_matrix(const GenotypeTable& table, std::span<const std::size_t> hybrid_rows);

/// Replace 'N' calls by the most frequent resolved call of the SNP (ties: first
/// in A,C,G,T,R,Y,S,W,K,M order; all-missing SNPs fall back to the reference).
/// Returns the number of cells replaced.
std::size_t resolve_missing_calls(GenotypeTable& table);

struct SelectionConfig {
    std::size_t rfe_target = 1000;
    std::size_t final_count = 100;
    std::size_t mi_bins = 16;
    double rfe_step = 0.1;
    GbdtConfig gbdt;
};

struct SnpScore {
    std::size_t column = 0;
    std::string id;
    int chromosome = 0;
    std::int64_t position = 0;
    double gain = 0.0;
    std::size_t split_count = 0;
    double mi = 0.0;
};

struct SelectionReport {
    /// Surviving SNP ids after each elimination round.
    std::vector<std::vector<std::string>> rfe_rounds;
    /// The RFE survivors in gain order, with gain, split count and MI.
    std::vector<SnpScore> survivors;
    /// The final set in MI order (descending, ties by input order).
    std::vector<SnpScore> selected;
    std::array<std::size_t, kMaizeChromosomes> per_chromosome{};

    std::vector<std::string> selected_ids() const;
    nlohmann::json to_json() const;
    static SelectionReport from_json(const nlohmann::json& doc);
    /// snp_id, chrom, pos, gain, split_count, mi for the final set.
    void write_tsv(std::ostream& out) const;
};

/// Two-stage selection on per-hybrid targets: GBDT-driven RFE down to
/// rfe_target (capped at the SNP count), then the top final_count by MI.
SelectionReport select_snps(const GenotypeTable& table, std::span<const std::size_t> hybrid_rows,
                            std::span<const double> targets, const SelectionConfig& config = {});

} // namespace deepg2p
