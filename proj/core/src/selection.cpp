#include "deepg2p/selection.hpp"

#include "deepg2p/encode.hpp"
#include "deepg2p/error.hpp"
#include "deepg2p/mutual_info.hpp"
#include "deepg2p/tsv.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace deepg2p {

int snp_dosage(char call, char reference_base)
{
    if (reference_base != 'A' && reference_base != 'C' && reference_base != 'G' && reference_base != 'T')
        throw DataError("invalid reference base '" + std::string(1, reference_base) + "'");
    const auto pair = alleles(call);
    if (pair[0] == reference_base && pair[1] == reference_base)
        return 0;
    if (pair[0] == reference_base || pair[1] == reference_base)
        return 1;
    return 2;
}

Tensor dosage_matrix(const GenotypeTable& table, std::span<const std::size_t> hybrid_rows)
{
    if (hybrid_rows.empty() || table.snp_count() == 0)
        throw DataError("dosage_matrix: empty selection");
    const std::size_t p = table.snp_count();
    Tensor x({hybrid_rows.size(), p});
    for (std::size_t i = 0; i < hybrid_rows.size(); ++i)
        for (std::size_t s = 0; s < p; ++s)
            x.at(i, s) = snp_dosage(table.call(hybrid_rows[i], s), table.snps[s].reference_base());
    return x;
}

std::size_t resolve_missing_calls(GenotypeTable& table)
{
    static constexpr std::string_view letters = "ACGTRYSWKM";
    const std::size_t p = table.snp_count();
    std::size_t replaced = 0;
    for (std::size_t s = 0; s < p; ++s) {
        std::array<std::size_t, letters.size()> counts{};
        bool any_missing = false;
        for (std::size_t h = 0; h < table.hybrid_count(); ++h) {
            const char c = table.call(h, s);
            if (c == 'N')
                any_missing = true;
            else
                counts[letters.find(c)] += 1;
        }
        if (!any_missing)
            continue;
        const auto best = std::max_element(counts.begin(), counts.end());
        const char fill = *best > 0 ? letters[static_cast<std::size_t>(best - counts.begin())]
                                    : table.snps[s].reference_base();
        for (std::size_t h = 0; h < table.hybrid_count(); ++h)
            if (table.calls[h * p + s] == 'N') {
                table.calls[h * p + s] = fill;
                ++replaced;
            }
    }
    return replaced;
}

std::vector<std::string> SelectionReport::selected_ids() const
{
    std::vector<std::string> ids;
    for (const auto& s : selected)
        ids.push_back(s.id);
    return ids;
}

namespace {

nlohmann::json score_json(const SnpScore& s)
{
    return {{"id", s.id},       {"column", s.column}, {"chrom", s.chromosome}, {"pos", s.position},
            {"gain", s.gain},   {"split_count", s.split_count}, {"mi", s.mi}};
}

SnpScore score_from_json(const nlohmann::json& j)
{
    SnpScore s;
    s.id = j.at("id").get<std::string>();
    s.column = j.at("column").get<std::size_t>();
    s.chromosome = j.at("chrom").get<int>();
    s.position = j.at("pos").get<std::int64_t>();
    s.gain = j.at("gain").get<double>();
    s.split_count = j.at("split_count").get<std::size_t>();
    s.mi = j.at("mi").get<double>();
    return s;
}

} // namespace

nlohmann::json SelectionReport::to_json() const
{
    nlohmann::json doc;
    doc["rfe_rounds"] = rfe_rounds;
    doc["survivors"] = nlohmann::json::array();
    for (const auto& s : survivors)
        doc["survivors"].push_back(score_json(s));
    doc["selected"] = nlohmann::json::array();
    for (const auto& s : selected)
        doc["selected"].push_back(score_json(s));
    nlohmann::json chrom = nlohmann::json::object();
    for (std::size_t c = 0; c < per_chromosome.size(); ++c)
        chrom[std::to_string(c + 1)] = per_chromosome[c];
    doc["per_chromosome"] = chrom;
    return doc;
}

SelectionReport SelectionReport::from_json(const nlohmann::json& doc)
{
    SelectionReport r;
    try {
        r.rfe_rounds = doc.at("rfe_rounds").get<std::vector<std::vector<std::string>>>();
        for (const auto& j : doc.at("survivors"))
            r.survivors.push_back(score_from_json(j));
        for (const auto& j : doc.at("selected"))
            r.selected.push_back(score_from_json(j));
        for (std::size_t c = 0; c < r.per_chromosome.size(); ++c)
            r.per_chromosome[c] = doc.at("per_chromosome").at(std::to_string(c + 1)).get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed selection report: ") + e.what());
    }
    return r;
}

void SelectionReport::write_tsv(std::ostream& out) const
{
    out << "snp_id\tchrom\tpos\tgain\tsplit_count\tmi\n";
    for (const auto& s : selected)
        out << s.id << '\t' << s.chromosome << '\t' << s.position << '\t' << tsv::format_double(s.gain) << '\t'
            << s.split_count << '\t' << tsv::format_double(s.mi) << '\n';
}

SelectionReport select_snps(const GenotypeTable& table, std::span<const std::size_t> hybrid_rows,
                            std::span<const double> targets, const SelectionConfig& config)
{
    const std::size_t p = table.snp_count();
    if (config.final_count == 0)
        throw ConfigError("select_snps: final_count must be positive");
    if (p < config.final_count)
        throw DataError("select_snps: " + std::to_string(p) + " input SNPs, fewer than the " +
                        std::to_string(config.final_count) + " to select");
    if (hybrid_rows.size() != targets.size())
        throw ShapeError("select_snps: hybrid rows and targets differ in length");

    const Tensor x = dosage_matrix(table, hybrid_rows);
    const std::size_t rfe_target = std::clamp(config.rfe_target, config.final_count, p);
    const RfeResult rfe = rfe_select(x, targets, rfe_target, config.gbdt, config.rfe_step);

    SelectionReport report;
    for (const auto& round : rfe.rounds) {
        std::vector<std::string> ids;
        for (std::size_t c : round)
            ids.push_back(table.snps[c].id);
        report.rfe_rounds.push_back(std::move(ids));
    }

    const std::size_t n = hybrid_rows.size();
    std::vector<int> classes(n);
    for (std::size_t k = 0; k < rfe.selected.size(); ++k) {
        const std::size_t col = rfe.selected[k];
        for (std::size_t i = 0; i < n; ++i)
            classes[i] = static_cast<int>(x.at(i, col));
        SnpScore score;
        score.column = col;
        score.id = table.snps[col].id;
        score.chromosome = table.snps[col].chromosome;
        score.position = table.snps[col].position;
        score.gain = rfe.gain[k];
        score.split_count = rfe.split_count[k];
        score.mi = mutual_information(classes, targets, config.mi_bins);
        report.survivors.push_back(std::move(score));
    }

    std::vector<SnpScore> ranked = report.survivors;
    std::stable_sort(ranked.begin(), ranked.end(), [](const SnpScore& a, const SnpScore& b) {
        if (a.mi != b.mi)
            return a.mi > b.mi;
        return a.column < b.column;
    });
    ranked.resize(config.final_count);
    report.selected = std::move(ranked);
    for (const auto& s : report.selected)
        report.per_chromosome[static_cast<std::size_t>(s.chromosome - 1)] += 1;
    return report;
}

} // namespace deepg2p
