#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace deepg2p {

inline constexpr int kMaizeChromosomes = 10;

struct SnpDescriptor {
    std::string id;
    int chromosome = 1;
    std::int64_t position = 1;
    /// Reference bases around and including the SNP site (length 2w+1).
    std::string context;

    std::size_t flank() const { return context.size() / 2; }
    char reference_base() const { return context[context.size() / 2]; }
    bool operator==(const SnpDescriptor&) const = default;
};

/// IUPAC letters accepted in genotype calls.
bool is_genotype_letter(char letter);

struct GenotypeTable {
    std::vector<SnpDescriptor> snps;
    std::vector<std::string> hybrids;
    /// hybrids x snps, row-major.
    std::vector<char> calls;

    std::size_t hybrid_count() const { return hybrids.size(); }
    std::size_t snp_count() const { return snps.size(); }
    char call(std::size_t hybrid, std::size_t snp) const { return calls[hybrid * snps.size() + snp]; }

    std::size_t hybrid_index(std::string_view id) const;
    std::size_t snp_index(std::string_view id) const;
    /// Throws DataError on duplicate ids, bad letters, inconsistent sizes.
    void validate() const;

    bool operator==(const GenotypeTable&) const = default;
};

struct DailyRecord {
    std::string date; // YYYY-MM-DD
    double srad = 0.0;
    double vp = 0.0;
    double prcp = 0.0;
    double tmax = 0.0;
    double tmin = 0.0;
    double wind = 0.0;
    // Derived by derive_weather().
    double dew_point = 0.0;
    double rh = 0.0;
    double gdd = 0.0;

    bool operator==(const DailyRecord&) const = default;
};

struct DailyWeather {
    std::string env_id;
    std::vector<DailyRecord> days;

    bool operator==(const DailyWeather&) const = default;
};

/// env_id plus a fixed number of named numeric columns; NaN marks a missing cell.
struct FeatureTable {
    std::vector<std::string> feature_names;
    std::vector<std::string> env_ids;
    std::vector<std::vector<double>> rows;

    std::size_t index(std::string_view env_id) const;
    bool contains(std::string_view env_id) const;
};

struct Observation {
    std::string hybrid_id;
    std::string env_id;
    double yield = 0.0;

    bool operator==(const Observation&) const = default;
};

inline constexpr std::size_t kSoilFeatures = 19;
inline constexpr std::size_t kManagementFeatures = 5;

// Readers throw DataError with "<source>:<line>: ..." messages.
GenotypeTable read_genotypes(std::istream& in, std::string_view source = "genotypes.tsv");
std::vector<DailyWeather> read_weather_daily(std::istream& in, std::string_view source = "weather.tsv");
FeatureTable read_features(std::istream& in, std::size_t expected_columns, std::string_view source);
std::vector<Observation> read_phenotypes(std::istream& in, std::string_view source = "phenotypes.tsv");

GenotypeTable parse_genotypes(const std::filesystem::path& path);
std::vector<DailyWeather> parse_weather_daily(const std::filesystem::path& path);
FeatureTable parse_soil(const std::filesystem::path& path);
FeatureTable parse_management(const std::filesystem::path& path);
std::vector<Observation> parse_phenotypes(const std::filesystem::path& path);

void write_genotypes(std::ostream& out, const GenotypeTable& table);
/// Writes the six raw weather columns only.
void write_weather_daily(std::ostream& out, const std::vector<DailyWeather>& weather);
void write_features(std::ostream& out, const FeatureTable& table);
void write_phenotypes(std::ostream& out, const std::vector<Observation>& observations);

std::unordered_map<std::string, std::size_t> make_index(const std::vector<std::string>& ids);

/// Splits "<location>_<year>"; throws DataError if malformed.
std::pair<std::string, int> split_env_id(std::string_view env_id);

} // namespace deepg2p
