#pragma once

#include "run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace deepg2p::cli {

struct CommandOptions {
    std::filesystem::path checkpoint;
    std::optional<std::string> hybrid;
    std::optional<std::string> env;
};

void run_ingest(const RunConfig& config, std::ostream& out);
void run_select(const RunConfig& config, std::ostream& out);
void run_train(const RunConfig& config, std::ostream& out);
void run_evaluate(const RunConfig& config, std::ostream& out);
void run_predict(const RunConfig& config, const CommandOptions& options, std::ostream& out);
void run_simulate(const RunConfig& config, std::ostream& out);
void run_export_attention(const RunConfig& config, const CommandOptions& options, std::ostream& out);

nlohmann::json checkpoint_json(const FoldModel& model, const RunConfig& config);
FoldModel read_checkpoint(const std::filesystem::path& path);

/// S x T' attention weights as CSV rows labeled by SNP id.
void write_attention_csv(std::ostream& out, const std::vector<std::string>& snp_ids, const Tensor& weights);
void write_attention_svg(std::ostream& out, const std::vector<std::string>& snp_ids, const Tensor& weights);

} // namespace deepg2p::cli
