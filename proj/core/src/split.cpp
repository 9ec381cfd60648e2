#include "deepg2p/split.hpp"

#include "deepg2p/encode.hpp"
#include "deepg2p/error.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace deepg2p {

namespace {

double squared_distance(const Tensor& points, std::size_t i, const Tensor& centroids, std::size_t c)
{
    const std::size_t p = points.dim(1);
    const double* a = points.data().data() + i * p;
    const double* b = centroids.data().data() + c * p;
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

void copy_row(const Tensor& points, std::size_t i, Tensor& centroids, std::size_t c)
{
    const std::size_t p = points.dim(1);
    std::copy_n(points.data().begin() + static_cast<std::ptrdiff_t>(i * p), p,
                centroids.data().begin() + static_cast<std::ptrdiff_t>(c * p));
}

} // namespace

KMeansResult kmeans(const Tensor& points, std::size_t k, const RngStream& rng, std::size_t max_iterations)
{
    if (points.rank() != 2)
        throw ShapeError("kmeans: points must be n x p");
    const std::size_t n = points.dim(0);
    const std::size_t p = points.dim(1);
    if (k == 0)
        throw ConfigError("kmeans: k must be positive");
    if (n < k)
        throw DataError("kmeans: " + std::to_string(n) + " points, fewer than k = " + std::to_string(k));

    RngStream draw = rng.fork("kmeans++");
    KMeansResult result;
    result.centroids = Tensor({k, p});
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    copy_row(points, draw.below(n), result.centroids, 0);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(points, i, result.centroids, c - 1));
            total += nearest[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = draw.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += nearest[i];
                if (acc > target && nearest[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            // Fewer distinct points than k: take the first points not yet used.
            pick = c;
        }
        copy_row(points, pick, result.centroids, c);
    }

    result.assignment.assign(n, k);
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = squared_distance(points, i, result.centroids, 0);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = squared_distance(points, i, result.centroids, c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (result.assignment[i] != best) {
                result.assignment[i] = best;
                changed = true;
            }
            dist[i] = best_d;
        }
        result.iterations = iter + 1;
        if (!changed && iter > 0)
            break;

        std::fill(counts.begin(), counts.end(), 0);
        result.centroids.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = result.assignment[i];
            ++counts[c];
            for (std::size_t j = 0; j < p; ++j)
                result.centroids.at(c, j) += points.at(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
                copy_row(points, far, result.centroids, c);
                dist[far] = 0.0;
                continue;
            }
            for (std::size_t j = 0; j < p; ++j)
                result.centroids.at(c, j) /= static_cast<double>(counts[c]);
        }
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            objective += squared_distance(points, i, result.centroids, result.assignment[i]);
        result.history.push_back(objective);
    }
    result.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        result.objective += squared_distance(points, i, result.centroids, result.assignment[i]);
    return result;
}

std::string_view split_mode_name(SplitMode mode)
{
    return mode == SplitMode::environment ? "environment" : "hybrid";
}

SplitMode parse_split_mode(std::string_view name)
{
    if (name == "environment" || name == "env")
        return SplitMode::environment;
    if (name == "hybrid")
        return SplitMode::hybrid;
    throw ConfigError("unknown split mode '" + std::string(name) + "' (expected environment or hybrid)");
}

std::string SplitPlan::unit_of(const Observation& o) const
{
    if (mode == SplitMode::environment)
        return o.env_id;
    auto it = hybrid_cluster.find(o.hybrid_id);
    if (it == hybrid_cluster.end())
        throw DataError("split plan has no cluster for hybrid '" + o.hybrid_id + "'");
    return it->second;
}

std::size_t SplitPlan::group_of_unit(std::string_view unit) const
{
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (std::find(groups[g].begin(), groups[g].end(), unit) != groups[g].end())
            return g;
    throw DataError("split plan has no group for unit '" + std::string(unit) + "'");
}

Rotation SplitPlan::rotation(std::size_t r) const
{
    const std::size_t k = folds();
    if (r >= k)
        throw ConfigError("rotation " + std::to_string(r) + " out of range for " + std::to_string(k) + " folds");
    Rotation rot;
    rot.test_group = r;
    rot.validation_group = (r + 1) % k;
    for (std::size_t g = 0; g < k; ++g)
        if (g != rot.test_group && g != rot.validation_group)
            rot.train_groups.push_back(g);
    return rot;
}

nlohmann::json SplitPlan::to_json() const
{
    nlohmann::json doc{{"mode", std::string(split_mode_name(mode))}, {"groups", groups}};
    if (mode == SplitMode::hybrid) {
        std::map<std::string, std::string> sorted(hybrid_cluster.begin(), hybrid_cluster.end());
        doc["hybrid_cluster"] = sorted;
    }
    return doc;
}

SplitPlan SplitPlan::from_json(const nlohmann::json& doc)
{
    SplitPlan plan;
    try {
        plan.mode = parse_split_mode(doc.at("mode").get<std::string>());
        plan.groups = doc.at("groups").get<std::vector<std::vector<std::string>>>();
        if (doc.contains("hybrid_cluster"))
            for (const auto& [h, c] : doc.at("hybrid_cluster").items())
                plan.hybrid_cluster.emplace(h, c.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed split plan: ") + e.what());
    }
    return plan;
}

Tensor genotype_points(const GenotypeTable& table, const std::vector<std::string>& hybrids)
{
    const std::size_t p = table.snp_count();
    Tensor points({hybrids.size(), 4 * p});
    for (std::size_t i = 0; i < hybrids.size(); ++i) {
        const std::size_t h = table.hybrid_index(hybrids[i]);
        for (std::size_t s = 0; s < p; ++s) {
            const auto v = encode_letter(table.call(h, s));
            for (std::size_t b = 0; b < 4; ++b)
                points.at(i, 4 * s + b) = v[b];
        }
    }
    return points;
}

SplitPlan make_split(const std::vector<Observation>& observations, SplitMode mode, const GenotypeTable* genotypes,
                     std::size_t clusters, std::size_t folds, std::uint64_t seed)
{
    if (folds < 3)
        throw ConfigError("make_split: need at least 3 folds (train, validation, test)");
    const RngStream rng(seed, "split");
    SplitPlan plan;
    plan.mode = mode;
    std::vector<std::string> units;
    if (mode == SplitMode::environment) {
        std::set<std::string> envs;
        for (const auto& o : observations)
            envs.insert(o.env_id);
        units.assign(envs.begin(), envs.end());
    } else {
        if (!genotypes)
            throw ConfigError("make_split: hybrid mode needs the genotype table");
        std::set<std::string> ids;
        for (const auto& o : observations)
            ids.insert(o.hybrid_id);
        const std::vector<std::string> hybrids(ids.begin(), ids.end());
        const KMeansResult km = kmeans(genotype_points(*genotypes, hybrids), clusters, rng.fork("clusters"));
        std::set<std::size_t> used(km.assignment.begin(), km.assignment.end());
        for (std::size_t c : used)
            units.push_back("cluster_" + std::to_string(c));
        for (std::size_t i = 0; i < hybrids.size(); ++i)
            plan.hybrid_cluster[hybrids[i]] = "cluster_" + std::to_string(km.assignment[i]);
    }
    if (units.size() < folds)
        throw DataError("make_split: " + std::to_string(units.size()) + " units, fewer than " + std::to_string(folds) +
                        " folds");
    RngStream shuffle = rng.fork("deal");
    shuffle.shuffle(std::span<std::string>(units));
    plan.groups.assign(folds, {});
    for (std::size_t i = 0; i < units.size(); ++i)
        plan.groups[i % folds].push_back(units[i]);
    return plan;
}

} // namespace deepg2p
