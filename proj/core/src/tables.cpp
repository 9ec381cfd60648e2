#include "deepg2p/tables.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/tsv.hpp"
#include "deepg2p/weather.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_set>

namespace deepg2p {

namespace {

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    return in;
}

void expect_header(tsv::LineReader& reader, const std::vector<std::string_view>& fields,
                   const std::vector<std::string_view>& expected)
{
    if (fields.size() < expected.size())
        throw DataError(reader.where("header has " + std::to_string(fields.size()) +
                                     " columns, expected at least " + std::to_string(expected.size())));
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (fields[i] != expected[i])
            throw DataError(reader.where("header column " + std::to_string(i + 1) + " is '" +
                                         std::string(fields[i]) + "', expected '" +
                                         std::string(expected[i]) + "'"));
}

double require_double(const tsv::LineReader& reader, std::string_view text, std::string_view column)
{
    auto value = tsv::try_parse_double(text);
    if (!value)
        throw DataError(reader.where("column '" + std::string(column) + "': '" + std::string(text) +
                                     "' is not a finite number"));
    return *value;
}

bool is_missing(std::string_view text)
{
    return text.empty() || text == "NA" || text == "NaN" || text == "nan";
}

bool valid_date(std::string_view date)
{
    if (date.size() != 10 || date[4] != '-' || date[7] != '-')
        return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (date[i] < '0' || date[i] > '9')
            return false;
    const int month = (date[5] - '0') * 10 + (date[6] - '0');
    const int day = (date[8] - '0') * 10 + (date[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

} // namespace

bool is_genotype_letter(char letter)
{
    switch (letter) {
    case 'A': case 'C': case 'G': case 'T':
    case 'R': case 'Y': case 'S': case 'W': case 'K': case 'M':
    case 'N':
        return true;
    default:
        return false;
    }
}

std::unordered_map<std::string, std::size_t> make_index(const std::vector<std::string>& ids)
{
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        index.emplace(ids[i], i);
    return index;
}

std::size_t GenotypeTable::hybrid_index(std::string_view id) const
{
    for (std::size_t i = 0; i < hybrids.size(); ++i)
        if (hybrids[i] == id)
            return i;
    throw DataError("unknown hybrid id '" + std::string(id) + "'");
}

std::size_t GenotypeTable::snp_index(std::string_view id) const
{
    for (std::size_t i = 0; i < snps.size(); ++i)
        if (snps[i].id == id)
            return i;
    throw DataError("unknown snp id '" + std::string(id) + "'");
}

void GenotypeTable::validate() const
{
    if (calls.size() != hybrids.size() * snps.size())
        throw DataError("genotype call matrix has " + std::to_string(calls.size()) + " cells, expected " +
                        std::to_string(hybrids.size() * snps.size()));
    std::unordered_set<std::string> seen;
    for (const auto& snp : snps) {
        if (!seen.insert(snp.id).second)
            throw DataError("duplicate snp id '" + snp.id + "'");
        if (snp.chromosome < 1 || snp.chromosome > kMaizeChromosomes)
            throw DataError("snp '" + snp.id + "': chromosome " + std::to_string(snp.chromosome) +
                            " outside 1.." + std::to_string(kMaizeChromosomes));
        if (snp.position < 1)
            throw DataError("snp '" + snp.id + "': position must be positive");
        if (snp.context.size() % 2 == 0)
            throw DataError("snp '" + snp.id + "': context length must be odd");
        for (char c : snp.context)
            if (c != 'A' && c != 'C' && c != 'G' && c != 'T')
                throw DataError("snp '" + snp.id + "': context must use A/C/G/T only");
    }
    seen.clear();
    for (const auto& h : hybrids)
        if (!seen.insert(h).second)
            throw DataError("duplicate hybrid id '" + h + "'");
    for (std::size_t i = 0; i < calls.size(); ++i)
        if (!is_genotype_letter(calls[i]))
            throw DataError("invalid genotype letter '" + std::string(1, calls[i]) + "' for hybrid '" +
                            hybrids[i / snps.size()] + "', snp '" + snps[i % snps.size()].id + "'");
}

std::size_t FeatureTable::index(std::string_view env_id) const
{
    for (std::size_t i = 0; i < env_ids.size(); ++i)
        if (env_ids[i] == env_id)
            return i;
    throw DataError("unknown environment '" + std::string(env_id) + "'");
}

bool FeatureTable::contains(std::string_view env_id) const
{
    for (const auto& id : env_ids)
        if (id == env_id)
            return true;
    return false;
}

std::pair<std::string, int> split_env_id(std::string_view env_id)
{
    const std::size_t pos = env_id.rfind('_');
    if (pos == std::string_view::npos || pos == 0 || pos + 1 == env_id.size())
        throw DataError("environment id '" + std::string(env_id) + "' is not <location>_<year>");
    auto year = tsv::try_parse_int(env_id.substr(pos + 1));
    if (!year)
        throw DataError("environment id '" + std::string(env_id) + "' has a non-numeric year");
    return {std::string(env_id.substr(0, pos)), static_cast<int>(*year)};
}

GenotypeTable read_genotypes(std::istream& in, std::string_view source)
{
    tsv::LineReader reader(in, std::string(source));
    std::string line;
    if (!reader.next(line))
        throw DataError(std::string(source) + ": empty file");
    auto header = tsv::split(line);
    expect_header(reader, header, {"snp_id", "chrom", "pos", "context"});

    GenotypeTable table;
    for (std::size_t i = 4; i < header.size(); ++i)
        table.hybrids.emplace_back(header[i]);
    if (table.hybrids.empty())
        throw DataError(reader.where("no hybrid columns"));
    {
        std::unordered_set<std::string> seen;
        for (const auto& h : table.hybrids)
            if (!seen.insert(h).second)
                throw DataError(reader.where("duplicate hybrid id '" + h + "'"));
    }

    // Read SNP-major, then transpose into the hybrids x snps matrix.
    std::vector<std::string> snp_calls;
    std::unordered_set<std::string> seen_ids;
    while (reader.next(line)) {
        auto fields = tsv::split(line);
        if (fields.size() != header.size())
            throw DataError(reader.where("expected " + std::to_string(header.size()) + " columns, found " +
                                         std::to_string(fields.size())));
        SnpDescriptor snp;
        snp.id = std::string(fields[0]);
        if (snp.id.empty())
            throw DataError(reader.where("empty snp_id"));
        if (!seen_ids.insert(snp.id).second)
            throw DataError(reader.where("duplicate snp id '" + snp.id + "'"));
        auto chrom = tsv::try_parse_int(fields[1]);
        if (!chrom || *chrom < 1 || *chrom > kMaizeChromosomes)
            throw DataError(reader.where("chrom '" + std::string(fields[1]) + "' must be an integer in 1.." +
                                         std::to_string(kMaizeChromosomes)));
        snp.chromosome = static_cast<int>(*chrom);
        auto pos = tsv::try_parse_int(fields[2]);
        if (!pos || *pos < 1)
            throw DataError(reader.where("pos '" + std::string(fields[2]) + "' must be a positive integer"));
        snp.position = *pos;
        snp.context = std::string(fields[3]);
        if (snp.context.size() % 2 == 0)
            throw DataError(reader.where("context '" + snp.context + "' must have odd length"));
        for (char c : snp.context)
            if (c != 'A' && c != 'C' && c != 'G' && c != 'T')
                throw DataError(reader.where("context '" + snp.context + "' must use A/C/G/T only"));

        std::string row;
        row.reserve(table.hybrids.size());
        for (std::size_t h = 0; h < table.hybrids.size(); ++h) {
            std::string_view cell = fields[4 + h];
            if (cell.size() != 1 || !is_genotype_letter(cell[0]))
                throw DataError(reader.where("column '" + table.hybrids[h] + "' (column " +
                                             std::to_string(5 + h) + "): invalid genotype call '" +
                                             std::string(cell) + "'"));
            row.push_back(cell[0]);
        }
        table.snps.push_back(std::move(snp));
        snp_calls.push_back(std::move(row));
    }

    const std::size_t p = table.snps.size();
    table.calls.assign(table.hybrids.size() * p, 'N');
    for (std::size_t s = 0; s < p; ++s)
        for (std::size_t h = 0; h < table.hybrids.size(); ++h)
            table.calls[h * p + s] = snp_calls[s][h];
    return table;
}

std::vector<DailyWeather> read_weather_daily(std::istream& in, std::string_view source)
{
    tsv::LineReader reader(in, std::string(source));
    std::string line;
    if (!reader.next(line))
        throw DataError(std::string(source) + ": empty file");
    const std::vector<std::string_view> columns{"env_id", "date", "srad", "vp", "prcp", "tmax", "tmin", "wind"};
    auto header = tsv::split(line);
    expect_header(reader, header, columns);
    if (header.size() != columns.size())
        throw DataError(reader.where("weather header must have exactly 8 columns"));

    std::vector<DailyWeather> weather;
    std::unordered_map<std::string, std::size_t> index;
    while (reader.next(line)) {
        auto fields = tsv::split(line);
        if (fields.size() != columns.size())
            throw DataError(reader.where("expected 8 columns, found " + std::to_string(fields.size())));
        std::string env(fields[0]);
        split_env_id(env);
        DailyRecord day;
        day.date = std::string(fields[1]);
        if (!valid_date(day.date))
            throw DataError(reader.where("date '" + day.date + "' is not YYYY-MM-DD"));
        day.srad = require_double(reader, fields[2], "srad");
        day.vp = require_double(reader, fields[3], "vp");
        day.prcp = require_double(reader, fields[4], "prcp");
        day.tmax = require_double(reader, fields[5], "tmax");
        day.tmin = require_double(reader, fields[6], "tmin");
        day.wind = require_double(reader, fields[7], "wind");
        try {
            derive_weather(day);
        } catch (const Error& e) {
            throw DataError(reader.where(e.what()));
        }

        auto [it, inserted] = index.emplace(env, weather.size());
        if (inserted)
            weather.push_back(DailyWeather{env, {}});
        auto& days = weather[it->second].days;
        if (!days.empty() && !(days.back().date < day.date))
            throw DataError(reader.where("dates for '" + env + "' must be strictly increasing"));
        days.push_back(std::move(day));
    }
    return weather;
}

FeatureTable read_features(std::istream& in, std::size_t expected_columns, std::string_view source)
{
    tsv::LineReader reader(in, std::string(source));
    std::string line;
    if (!reader.next(line))
        throw DataError(std::string(source) + ": empty file");
    auto header = tsv::split(line);
    expect_header(reader, header, {"env_id"});
    if (header.size() != expected_columns + 1)
        throw DataError(reader.where("expected env_id plus " + std::to_string(expected_columns) +
                                     " feature columns, found " + std::to_string(header.size() - 1)));
    FeatureTable table;
    for (std::size_t i = 1; i < header.size(); ++i)
        table.feature_names.emplace_back(header[i]);
    std::unordered_set<std::string> seen;
    while (reader.next(line)) {
        auto fields = tsv::split(line);
        if (fields.size() != header.size())
            throw DataError(reader.where("expected " + std::to_string(header.size()) + " columns, found " +
                                         std::to_string(fields.size())));
        std::string env(fields[0]);
        split_env_id(env);
        if (!seen.insert(env).second)
            throw DataError(reader.where("duplicate env_id '" + env + "'"));
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i)
            row.push_back(is_missing(fields[i]) ? std::nan("")
                                                : require_double(reader, fields[i], table.feature_names[i - 1]));
        table.env_ids.push_back(std::move(env));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<Observation> read_phenotypes(std::istream& in, std::string_view source)
{
    tsv::LineReader reader(in, std::string(source));
    std::string line;
    if (!reader.next(line))
        throw DataError(std::string(source) + ": empty file");
    auto header = tsv::split(line);
    expect_header(reader, header, {"env_id", "hybrid_id", "yield"});
    if (header.size() != 3)
        throw DataError(reader.where("phenotype header must have exactly 3 columns"));
    std::vector<Observation> observations;
    while (reader.next(line)) {
        auto fields = tsv::split(line);
        if (fields.size() != 3)
            throw DataError(reader.where("expected 3 columns, found " + std::to_string(fields.size())));
        Observation obs;
        obs.env_id = std::string(fields[0]);
        split_env_id(obs.env_id);
        obs.hybrid_id = std::string(fields[1]);
        if (obs.hybrid_id.empty())
            throw DataError(reader.where("empty hybrid_id"));
        obs.yield = require_double(reader, fields[2], "yield");
        observations.push_back(std::move(obs));
    }
    return observations;
}

GenotypeTable parse_genotypes(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_genotypes(in, path.string());
}

std::vector<DailyWeather> parse_weather_daily(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_weather_daily(in, path.string());
}

FeatureTable parse_soil(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_features(in, kSoilFeatures, path.string());
}

FeatureTable parse_management(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_features(in, kManagementFeatures, path.string());
}

std::vector<Observation> parse_phenotypes(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_phenotypes(in, path.string());
}

void write_genotypes(std::ostream& out, const GenotypeTable& table)
{
    out << "snp_id\tchrom\tpos\tcontext";
    for (const auto& h : table.hybrids)
        out << '\t' << h;
    out << '\n';
    for (std::size_t s = 0; s < table.snps.size(); ++s) {
        const auto& snp = table.snps[s];
        out << snp.id << '\t' << snp.chromosome << '\t' << snp.position << '\t' << snp.context;
        for (std::size_t h = 0; h < table.hybrids.size(); ++h)
            out << '\t' << table.call(h, s);
        out << '\n';
    }
}

void write_weather_daily(std::ostream& out, const std::vector<DailyWeather>& weather)
{
    out << "env_id\tdate\tsrad\tvp\tprcp\ttmax\ttmin\twind\n";
    for (const auto& env : weather)
        for (const auto& d : env.days)
            out << env.env_id << '\t' << d.date << '\t' << tsv::format_double(d.srad) << '\t'
                << tsv::format_double(d.vp) << '\t' << tsv::format_double(d.prcp) << '\t'
                << tsv::format_double(d.tmax) << '\t' << tsv::format_double(d.tmin) << '\t'
                << tsv::format_double(d.wind) << '\n';
}

void write_features(std::ostream& out, const FeatureTable& table)
{
    out << "env_id";
    for (const auto& name : table.feature_names)
        out << '\t' << name;
    out << '\n';
    for (std::size_t i = 0; i < table.env_ids.size(); ++i) {
        out << table.env_ids[i];
        for (double v : table.rows[i])
            out << '\t' << (std::isnan(v) ? std::string("NA") : tsv::format_double(v));
        out << '\n';
    }
}

void write_phenotypes(std::ostream& out, const std::vector<Observation>& observations)
{
    out << "env_id\thybrid_id\tyield\n";
    for (const auto& obs : observations)
        out << obs.env_id << '\t' << obs.hybrid_id << '\t' << tsv::format_double(obs.yield) << '\n';
}

} // namespace deepg2p
