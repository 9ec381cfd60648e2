#include "run_config.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/rng.hpp"

#include <fstream>

namespace deepg2p::cli {

namespace {

std::filesystem::path resolve(const nlohmann::json& v, const std::filesystem::path& base)
{
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() && !base.empty() ? base / p : p;
}

GbdtConfig gbdt_from_json(const nlohmann::json& doc, GbdtConfig c)
{
    for (const auto& [key, v] : doc.items()) {
        if (key == "trees") c.trees = v.get<std::size_t>();
        else if (key == "max_leaves") c.max_leaves = v.get<std::size_t>();
        else if (key == "max_depth") c.max_depth = v.get<std::size_t>();
        else if (key == "shrinkage") c.shrinkage = v.get<double>();
        else if (key == "min_samples_leaf") c.min_samples_leaf = v.get<std::size_t>();
        else if (key == "max_bins") c.max_bins = v.get<std::size_t>();
        else
            throw ConfigError("selection.gbdt." + key + ": unknown field");
    }
    return c;
}

nlohmann::json gbdt_to_json(const GbdtConfig& c)
{
    return {{"trees", c.trees},         {"max_leaves", c.max_leaves},
            {"max_depth", c.max_depth}, {"shrinkage", c.shrinkage},
            {"min_samples_leaf", c.min_samples_leaf}, {"max_bins", c.max_bins}};
}

} // namespace

std::uint64_t RunConfig::require_seed() const
{
    if (!seed)
        throw ConfigError("seed: required (set \"seed\" in the config or pass --seed)");
    return *seed;
}

void RunConfig::require_data() const
{
    const std::pair<const char*, const std::filesystem::path*> files[] = {
        {"data.genotypes", &data.genotypes}, {"data.weather", &data.weather},
        {"data.soil", &data.soil},           {"data.management", &data.management},
        {"data.phenotypes", &data.phenotypes}};
    for (const auto& [name, path] : files) {
        if (path->empty())
            throw ConfigError(std::string(name) + ": path not set");
        if (!std::filesystem::is_regular_file(*path))
            throw ConfigError(std::string(name) + ": file '" + path->string() + "' does not exist");
    }
}

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json doc;
    doc["data"] = {{"genotypes", data.genotypes.string()},
                   {"weather", data.weather.string()},
                   {"soil", data.soil.string()},
                   {"management", data.management.string()},
                   {"phenotypes", data.phenotypes.string()}};
    doc["output_dir"] = output_dir.string();
    doc["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    doc["split"] = {{"mode", std::string(split_mode_name(split_mode))}, {"folds", folds}, {"clusters", clusters}};
    doc["model"] = crossval.model.to_json();
    doc["train"] = crossval.train.to_json();
    const SelectionConfig& s = crossval.selection;
    doc["selection"] = {{"rfe_target", s.rfe_target},
                        {"final_count", s.final_count},
                        {"mi_bins", s.mi_bins},
                        {"rfe_step", s.rfe_step},
                        {"global", crossval.global_selection},
                        {"gbdt", gbdt_to_json(s.gbdt)}};
    doc["threads"] = crossval.threads;
    doc["rotations"] = crossval.rotations;
    doc["simulate"] = simulate.to_json();
    return doc;
}

std::uint64_t RunConfig::hash() const
{
    nlohmann::json doc = to_json();
    // Where outputs go does not change what they contain.
    doc.erase("output_dir");
    doc.erase("threads");
    return fnv1a64(doc.dump());
}

RunConfig apply_config(const nlohmann::json& doc, RunConfig c, const std::filesystem::path& relative_to)
{
    if (!doc.is_object())
        throw ConfigError("config: top level must be an object");
    std::string field;
    try {
        for (const auto& [key, v] : doc.items()) {
            field = key;
            if (key == "data") {
                for (const auto& [k, p] : v.items()) {
                    field = "data." + k;
                    if (k == "dir") {
                        c.data = DataPaths::in_directory(resolve(p, relative_to));
                    }
                }
                for (const auto& [k, p] : v.items()) {
                    field = "data." + k;
                    if (k == "dir") continue;
                    else if (k == "genotypes") c.data.genotypes = resolve(p, relative_to);
                    else if (k == "weather") c.data.weather = resolve(p, relative_to);
                    else if (k == "soil") c.data.soil = resolve(p, relative_to);
                    else if (k == "management") c.data.management = resolve(p, relative_to);
                    else if (k == "phenotypes") c.data.phenotypes = resolve(p, relative_to);
                    else
                        throw ConfigError(field + ": unknown field");
                }
            } else if (key == "output_dir") {
                c.output_dir = resolve(v, relative_to);
            } else if (key == "seed") {
                if (v.is_null())
                    c.seed.reset();
                else
                    c.seed = v.get<std::uint64_t>();
            } else if (key == "split") {
                for (const auto& [k, x] : v.items()) {
                    field = "split." + k;
                    if (k == "mode") c.split_mode = parse_split_mode(x.get<std::string>());
                    else if (k == "folds") c.folds = x.get<std::size_t>();
                    else if (k == "clusters") c.clusters = x.get<std::size_t>();
                    else
                        throw ConfigError(field + ": unknown field");
                }
            } else if (key == "model") {
                c.crossval.model = ModelConfig::from_json(v, c.crossval.model);
            } else if (key == "train") {
                c.crossval.train = TrainConfig::from_json(v, c.crossval.train);
            } else if (key == "selection") {
                SelectionConfig& s = c.crossval.selection;
                for (const auto& [k, x] : v.items()) {
                    field = "selection." + k;
                    if (k == "rfe_target") s.rfe_target = x.get<std::size_t>();
                    else if (k == "final_count") s.final_count = x.get<std::size_t>();
                    else if (k == "mi_bins") s.mi_bins = x.get<std::size_t>();
                    else if (k == "rfe_step") s.rfe_step = x.get<double>();
                    else if (k == "global") c.crossval.global_selection = x.get<bool>();
                    else if (k == "gbdt") s.gbdt = gbdt_from_json(x, s.gbdt);
                    else
                        throw ConfigError(field + ": unknown field");
                }
            } else if (key == "threads") {
                c.crossval.threads = v.get<std::size_t>();
            } else if (key == "rotations") {
                c.crossval.rotations = v.get<std::vector<std::size_t>>();
            } else if (key == "simulate") {
                c.simulate = SynthConfig::from_json(v, c.simulate);
            } else {
                throw ConfigError(key + ": unknown field");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(field + ": " + e.what());
    }
    return c;
}

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace deepg2p::cli
