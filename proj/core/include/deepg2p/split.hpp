#pragma once

#include "deepg2p/rng.hpp"
#include "deepg2p/tables.hpp"
#include "deepg2p/tensor.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace deepg2p {

struct KMeansResult {
    Tensor centroids; // k x p
    std::vector<std::size_t> assignment;
    double objective = 0.0;
    /// Objective after every Lloyd iteration (non-increasing).
    std::vector<double> history;
    std::size_t iterations = 0;
};

/// k-means++ seeding then Lloyd iterations until the assignment stops
/// changing or max_iterations. Empty clusters are re-seeded from the point
/// farthest from its centroid.
KMeansResult kmeans(const Tensor& points, std::size_t k, const RngStream& rng, std::size_t max_iterations = 300);

enum class SplitMode { environment, hybrid };

std::string_view split_mode_name(SplitMode mode);
SplitMode parse_split_mode(std::string_view name);

struct Rotation {
    std::size_t test_group = 0;
    std::size_t validation_group = 0;
    std::vector<std::size_t> train_groups;
};

/// Units (env ids, or hybrid clusters) dealt into fold groups. Rotation r
/// tests on group r, validates on group r+1 and trains on the rest.
struct SplitPlan {
    SplitMode mode = SplitMode::environment;
    std::vector<std::vector<std::string>> groups;
    /// Hybrid mode only: hybrid id -> cluster unit id.
    std::unordered_map<std::string, std::string> hybrid_cluster;

    std::size_t folds() const { return groups.size(); }
    std::string unit_of(const Observation& o) const;
    std::size_t group_of_unit(std::string_view unit) const;
    Rotation rotation(std::size_t r) const;
    nlohmann::json to_json() const;
    static SplitPlan from_json(const nlohmann::json& doc);
};

/// One-hot center-column vectors (4 values per SNP) of the given hybrids.
Tensor genotype_points(const GenotypeTable& table, const std::vector<std::string>& hybrids);

/// Environment mode: units are the observed env ids. Hybrid mode: the
/// observed hybrids are clustered into `clusters` groups by k-means over
/// genotype_points and clusters are the units.
SplitPlan make_split(const std::vector<Observation>& observations, SplitMode mode, const GenotypeTable* genotypes,
                     std::size_t clusters, std::size_t folds, std::uint64_t seed);

} // namespace deepg2p
