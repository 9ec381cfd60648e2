#include "commands.hpp"
#include "run_config.hpp"

#include "deepg2p/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumeric = 4 };

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string data_dir;
    std::string split_mode;
    std::string variant;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> threads;
    std::optional<std::size_t> folds;
    std::vector<std::size_t> rotations;
    bool global_selection = false;
    std::string checkpoint;
    std::string hybrid;
    std::string env;
};

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("-c,--config", f.config, "JSON config file");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("-o,--output", f.output, "Output directory");
    cmd->add_option("-d,--data-dir", f.data_dir, "Directory holding the five input tables");
}

void add_training(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--split-mode", f.split_mode, "environment or hybrid");
    cmd->add_option("--variant", f.variant, "full, no_ge or no_g");
    cmd->add_option("--epochs", f.epochs, "Maximum training epochs");
    cmd->add_option("--threads", f.threads, "Fold-parallel worker threads");
    cmd->add_option("--folds", f.folds, "Number of fold groups");
    cmd->add_option("--rotations", f.rotations, "Rotations to run (default all)");
    cmd->add_flag("--global-selection", f.global_selection, "Select SNPs once on all observations");
}

void add_checkpoint(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--checkpoint", f.checkpoint, "Fold checkpoint JSON")->required();
    cmd->add_option("--hybrid", f.hybrid, "Restrict to one hybrid");
    cmd->add_option("--env", f.env, "Restrict to one environment");
}

deepg2p::cli::RunConfig resolve(const Flags& f)
{
    using namespace deepg2p;
    cli::RunConfig c;
    if (!f.config.empty()) {
        const std::filesystem::path path = f.config;
        c = cli::apply_config(cli::read_json_file(path), c, path.parent_path());
    }
    if (f.seed)
        c.seed = *f.seed;
    if (!f.output.empty())
        c.output_dir = f.output;
    if (!f.data_dir.empty())
        c.data = DataPaths::in_directory(f.data_dir);
    if (!f.split_mode.empty())
        c.split_mode = parse_split_mode(f.split_mode);
    if (!f.variant.empty())
        c.crossval.model.variant = parse_variant(f.variant);
    if (f.epochs)
        c.crossval.train.max_epochs = *f.epochs;
    if (f.threads)
        c.crossval.threads = *f.threads;
    if (f.folds)
        c.folds = *f.folds;
    if (!f.rotations.empty())
        c.crossval.rotations = f.rotations;
    if (f.global_selection)
        c.crossval.global_selection = true;
    c.crossval.model.validate();
    c.crossval.train.validate();
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Genotype-to-phenotype prediction toolkit"};
    app.require_subcommand(1);
    Flags flags;

    auto* ingest = app.add_subcommand("ingest", "Parse and validate the input tables");
    auto* select = app.add_subcommand("select-snps", "Two-stage SNP selection on all observations");
    auto* train = app.add_subcommand("train", "Cross-validated training");
    auto* evaluate = app.add_subcommand("evaluate", "Re-evaluate trained fold checkpoints");
    auto* predict = app.add_subcommand("predict", "Predict yields with a checkpoint");
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset with ground truth");
    auto* attention = app.add_subcommand("export-attention", "Export G*E attention weights");
    for (auto* cmd : {ingest, select, train, evaluate, predict, simulate, attention})
        add_common(cmd, flags);
    add_training(train, flags);
    add_checkpoint(predict, flags);
    add_checkpoint(attention, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    using namespace deepg2p;
    try {
        const cli::RunConfig config = resolve(flags);
        cli::CommandOptions options;
        options.checkpoint = flags.checkpoint;
        if (!flags.hybrid.empty())
            options.hybrid = flags.hybrid;
        if (!flags.env.empty())
            options.env = flags.env;

        if (*ingest)
            cli::run_ingest(config, std::cout);
        else if (*select)
            cli::run_select(config, std::cout);
        else if (*train)
            cli::run_train(config, std::cout);
        else if (*evaluate)
            cli::run_evaluate(config, std::cout);
        else if (*predict)
            cli::run_predict(config, options, std::cout);
        else if (*simulate)
            cli::run_simulate(config, std::cout);
        else if (*attention)
            cli::run_export_attention(config, options, std::cout);
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
