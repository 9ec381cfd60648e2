#pragma once

#include "deepg2p/crossval.hpp"
#include "deepg2p/dataset.hpp"
#include "deepg2p/split.hpp"
#include "deepg2p/synth.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace deepg2p::cli {

/// Resolved settings of one run. Precedence: built-in defaults, then the
/// config file, then command-line flags.
struct RunConfig {
    DataPaths data;
    std::filesystem::path output_dir = "deepg2p_out";
    std::optional<std::uint64_t> seed;
    SplitMode split_mode = SplitMode::environment;
    std::size_t folds = 10;
    std::size_t clusters = 100;
    CrossValConfig crossval;
    SynthConfig simulate;

    std::uint64_t require_seed() const;
    /// Throws ConfigError naming the first missing data file.
    void require_data() const;
    nlohmann::json to_json() const;
    std::uint64_t hash() const;
};

/// Applies a config document on top of `base`; unknown fields are errors
/// reported with their path.
RunConfig apply_config(const nlohmann::json& doc, RunConfig base, const std::filesystem::path& relative_to = {});
nlohmann::json read_json_file(const std::filesystem::path& path);

} // namespace deepg2p::cli
