#include "commands.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/tsv.hpp"
#include "deepg2p/version.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

namespace deepg2p::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kManifestSchema = 1;
constexpr int kCheckpointSchema = 1;

std::ofstream open_output(const fs::path& path)
{
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw DataError("cannot write '" + path.string() + "'");
    return f;
}

void write_json(const fs::path& path, const nlohmann::json& doc)
{
    auto f = open_output(path);
    f << doc.dump(2) << '\n';
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_manifest(const RunConfig& config, std::string_view command, const std::vector<std::string>& outputs)
{
    nlohmann::json doc;
    doc["schema_version"] = kManifestSchema;
    doc["command"] = command;
    doc["config"] = config.to_json();
    doc["config_hash"] = hex64(config.hash());
    doc["seed"] = config.seed ? nlohmann::json(*config.seed) : nlohmann::json(nullptr);
    doc["versions"] = {{"deepg2p", std::string(kVersion)},
                       {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                       {"compiler", __VERSION__},
                       {"cxx_standard", __cplusplus}};
    doc["outputs"] = outputs;
    write_json(config.output_dir / "manifest.json", doc);
}

Dataset load(const RunConfig& config)
{
    config.require_data();
    return load_dataset(config.data);
}

std::string fold_dir(std::size_t fold)
{
    std::string s = std::to_string(fold);
    return "fold_" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

void write_predictions(const fs::path& path, const Dataset& data, const std::vector<std::size_t>& folds,
                       const std::vector<std::size_t>& observations, const std::vector<double>& predictions)
{
    auto f = open_output(path);
    f << "fold\tenv_id\thybrid_id\tyield\tprediction\n";
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const Observation& o = data.observations[observations[i]];
        f << folds[i] << '\t' << o.env_id << '\t' << o.hybrid_id << '\t' << tsv::format_double(o.yield) << '\t'
          << tsv::format_double(predictions[i]) << '\n';
    }
}

void write_report(const fs::path& dir, const std::string& stem, const MetricReport& report)
{
    write_json(dir / (stem + ".json"), report.to_json());
    auto f = open_output(dir / (stem + ".tsv"));
    report.write_tsv(f);
}

void print_summary(std::ostream& out, const MetricReport& report)
{
    const Summary r = report.test_pearson();
    const Summary e = report.test_rmse();
    out << report.variant << " model, " << report.split_mode << " split, " << report.folds.size() << " folds\n";
    for (const auto& f : report.folds)
        out << "  fold " << f.fold << ": pearson "
            << (f.test.pearson ? tsv::format_double(*f.test.pearson) : std::string("NA")) << ", rmse "
            << tsv::format_double(f.test.rmse) << "\n";
    out << "  pearson " << r.mean << " +/- " << r.stddev << ", rmse " << e.mean << " +/- " << e.stddev << "\n";
}

std::vector<std::size_t> matching_observations(const Dataset& data, const CommandOptions& options)
{
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.observations.size(); ++i) {
        const Observation& o = data.observations[i];
        if ((!options.env || o.env_id == *options.env) && (!options.hybrid || o.hybrid_id == *options.hybrid))
            rows.push_back(i);
    }
    if (rows.empty())
        throw DataError("no observation matches the requested hybrid/environment");
    return rows;
}

} // namespace

nlohmann::json checkpoint_json(const FoldModel& model, const RunConfig& config)
{
    return {{"format", "deepg2p-checkpoint"},
            {"schema_version", kCheckpointSchema},
            {"config_hash", hex64(model.params.config.hash())},
            {"run_config_hash", hex64(config.hash())},
            {"fold_model", model.to_json()}};
}

FoldModel read_checkpoint(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open checkpoint '" + path.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        if (doc.at("format").get<std::string>() != "deepg2p-checkpoint")
            throw DataError(path.string() + ": not a checkpoint");
        if (doc.at("schema_version").get<int>() != kCheckpointSchema)
            throw DataError(path.string() + ": unsupported checkpoint schema");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    FoldModel model = FoldModel::from_json(doc.at("fold_model"));
    if (doc.at("config_hash").get<std::string>() != hex64(model.params.config.hash()))
        throw DataError(path.string() + ": config hash mismatch");
    return model;
}

void run_ingest(const RunConfig& config, std::ostream& out)
{
    const Dataset data = load(config);
    nlohmann::json summary;
    summary["hybrids"] = data.genotypes.hybrid_count();
    summary["snps"] = data.genotypes.snp_count();
    summary["environments"] = data.weather.size();
    summary["observations"] = data.observations.size();
    summary["resolved_missing_calls"] = data.resolved_missing_calls;
    nlohmann::json windows = nlohmann::json::object();
    for (const auto& w : data.weather)
        windows[w.env_id] = w.observed_windows;
    summary["observed_weather_windows"] = windows;
    std::size_t missing = 0;
    for (const auto* table : {&data.soil, &data.management})
        for (const auto& row : table->rows)
            missing += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](double v) { return v != v; }));
    summary["missing_feature_cells"] = missing;
    write_json(config.output_dir / "dataset_summary.json", summary);
    write_manifest(config, "ingest", {"dataset_summary.json"});
    out << "ingested " << data.genotypes.hybrid_count() << " hybrids x " << data.genotypes.snp_count() << " SNPs, "
        << data.weather.size() << " environments, " << data.observations.size() << " observations\n";
    if (data.resolved_missing_calls > 0)
        out << "  " << data.resolved_missing_calls << " missing genotype calls resolved to the modal call\n";
    if (missing > 0)
        out << "  " << missing << " missing soil/management cells (imputed per fold with training means)\n";
}

void run_select(const RunConfig& config, std::ostream& out)
{
    const Dataset data = load(config);
    std::vector<std::size_t> all(data.observations.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> hybrid_rows;
    std::vector<double> means;
    hybrid_mean_yields(data, all, hybrid_rows, means);
    const SelectionReport report = select_snps(data.genotypes, hybrid_rows, means, config.crossval.selection);
    write_json(config.output_dir / "selection.json", report.to_json());
    {
        auto f = open_output(config.output_dir / "selection.tsv");
        report.write_tsv(f);
    }
    write_manifest(config, "select-snps", {"selection.json", "selection.tsv"});
    out << "selected " << report.selected.size() << " of " << data.genotypes.snp_count() << " SNPs ("
        << report.survivors.size() << " after elimination, " << report.rfe_rounds.size() << " rounds)\n";
    out << "  per chromosome:";
    for (std::size_t c = 0; c < report.per_chromosome.size(); ++c)
        out << ' ' << (c + 1) << ':' << report.per_chromosome[c];
    out << '\n';
}

void run_train(const RunConfig& config, std::ostream& out)
{
    const std::uint64_t seed = config.require_seed();
    const Dataset data = load(config);
    const SplitPlan plan =
        make_split(data.observations, config.split_mode, &data.genotypes, config.clusters, config.folds, seed);
    const CrossValResult result = cross_validate(data, plan, config.crossval, seed);

    std::vector<std::string> outputs{"split.json", "report.json", "report.tsv", "predictions.tsv"};
    write_json(config.output_dir / "split.json", plan.to_json());
    write_report(config.output_dir, "report", result.report);
    std::vector<std::size_t> folds, observations;
    std::vector<double> predictions;
    for (const auto& f : result.folds) {
        const std::string dir = fold_dir(f.model.fold);
        write_json(config.output_dir / dir / "checkpoint.json", checkpoint_json(f.model, config));
        auto h = open_output(config.output_dir / dir / "history.csv");
        write_history_csv(h, f.metrics.history);
        outputs.push_back(dir + "/checkpoint.json");
        outputs.push_back(dir + "/history.csv");
        if (f.selection) {
            write_json(config.output_dir / dir / "selection.json", f.selection->to_json());
            outputs.push_back(dir + "/selection.json");
        }
        for (std::size_t i = 0; i < f.test_observations.size(); ++i) {
            folds.push_back(f.model.fold);
            observations.push_back(f.test_observations[i]);
            predictions.push_back(f.test_predictions[i]);
        }
    }
    write_predictions(config.output_dir / "predictions.tsv", data, folds, observations, predictions);
    write_manifest(config, "train", outputs);
    print_summary(out, result.report);
}

void run_evaluate(const RunConfig& config, std::ostream& out)
{
    const Dataset data = load(config);
    const SplitPlan plan = SplitPlan::from_json(read_json_file(config.output_dir / "split.json"));
    MetricReport report;
    report.split_mode = std::string(split_mode_name(plan.mode));
    std::vector<std::size_t> folds, observations;
    std::vector<double> predictions;
    for (std::size_t r = 0; r < plan.folds(); ++r) {
        const fs::path path = config.output_dir / fold_dir(r) / "checkpoint.json";
        if (!fs::exists(path))
            continue;
        const FoldModel model = read_checkpoint(path);
        report.variant = std::string(variant_name(model.params.config.variant));
        const FoldMembers members = fold_members(data, plan, r);
        auto truth = [&](const std::vector<std::size_t>& rows) {
            std::vector<double> y;
            for (std::size_t o : rows)
                y.push_back(data.observations[o].yield);
            return y;
        };
        FoldMetrics m;
        m.fold = r;
        m.validation = evaluate(predict_observations(data, model, members.validation), truth(members.validation));
        const auto test_pred = predict_observations(data, model, members.test);
        m.test = evaluate(test_pred, truth(members.test));
        report.folds.push_back(std::move(m));
        for (std::size_t i = 0; i < members.test.size(); ++i) {
            folds.push_back(r);
            observations.push_back(members.test[i]);
            predictions.push_back(test_pred[i]);
        }
    }
    if (report.folds.empty())
        throw DataError("no fold checkpoints under '" + config.output_dir.string() + "'");
    write_report(config.output_dir, "evaluation", report);
    write_predictions(config.output_dir / "evaluation_predictions.tsv", data, folds, observations, predictions);
    write_manifest(config, "evaluate", {"evaluation.json", "evaluation.tsv", "evaluation_predictions.tsv"});
    print_summary(out, report);
}

void run_predict(const RunConfig& config, const CommandOptions& options, std::ostream& out)
{
    if (options.checkpoint.empty())
        throw ConfigError("checkpoint: required for predict");
    const FoldModel model = read_checkpoint(options.checkpoint);
    const Dataset data = load(config);
    std::vector<std::size_t> rows = matching_observations(data, options);
    const auto pred = predict_observations(data, model, rows);
    write_predictions(config.output_dir / "predictions.tsv", data, std::vector<std::size_t>(rows.size(), model.fold),
                      rows, pred);
    write_manifest(config, "predict", {"predictions.tsv"});
    out << "predicted " << rows.size() << " observations with the fold " << model.fold << " "
        << variant_name(model.params.config.variant) << " model\n";
}

void run_simulate(const RunConfig& config, std::ostream& out)
{
    SynthConfig synth = config.simulate;
    if (config.seed)
        synth.seed = *config.seed;
    const SynthData data = generate(synth);
    write_synth(data, config.output_dir);
    write_manifest(config, "simulate",
                   {"genotypes.tsv", "weather.tsv", "soil.tsv", "management.tsv", "phenotypes.tsv",
                    "ground_truth.json"});
    out << "simulated " << synth.hybrids << " hybrids x " << synth.snps << " SNPs in " << synth.environments
        << " environments (" << data.observations.size() << " observations, " << synth.causal << " causal, "
        << synth.interactions << " G*E)\n";
}

void run_export_attention(const RunConfig& config, const CommandOptions& options, std::ostream& out)
{
    if (options.checkpoint.empty())
        throw ConfigError("checkpoint: required for export-attention");
    const FoldModel model = read_checkpoint(options.checkpoint);
    if (model.params.config.variant != Variant::full)
        throw ConfigError("export-attention: checkpoint variant is " +
                          std::string(variant_name(model.params.config.variant)) + ", attention needs full");
    const Dataset data = load(config);
    const std::vector<std::size_t> rows = matching_observations(data, options);
    const TrainingData encoded = model.preprocessor.encode(data, model.params.config);
    const auto sample_rows = model.preprocessor.rows(data, rows);

    const std::size_t s = model.params.config.snp_count;
    const std::size_t t = model.params.config.weather_steps();
    Tensor mean({s, t});
    constexpr std::size_t kBatch = 128;
    for (std::size_t start = 0; start < sample_rows.size(); start += kBatch) {
        const std::size_t n = std::min(kBatch, sample_rows.size() - start);
        const Tensor att =
            attention_trace(model.params, encoded.gather(std::span(sample_rows).subspan(start, n)));
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t i = 0; i < s; ++i)
                for (std::size_t k = 0; k < t; ++k)
                    mean.at(i, k) += att.at(b, i, k);
    }
    for (double& v : mean.data())
        v /= static_cast<double>(sample_rows.size());

    {
        auto f = open_output(config.output_dir / "attention.csv");
        write_attention_csv(f, model.preprocessor.snp_ids, mean);
    }
    {
        auto f = open_output(config.output_dir / "attention.svg");
        write_attention_svg(f, model.preprocessor.snp_ids, mean);
    }
    write_manifest(config, "export-attention", {"attention.csv", "attention.svg"});
    out << "attention over " << t << " weather steps for " << s << " SNPs, averaged over " << rows.size()
        << " observations\n";
}

void write_attention_csv(std::ostream& out, const std::vector<std::string>& snp_ids, const Tensor& weights)
{
    const std::size_t s = weights.dim(0), t = weights.dim(1);
    if (snp_ids.size() != s)
        throw ShapeError("attention export: SNP id count does not match the weight rows");
    out << "snp_id";
    for (std::size_t k = 0; k < t; ++k)
        out << ",t" << k;
    out << '\n';
    for (std::size_t i = 0; i < s; ++i) {
        out << snp_ids[i];
        for (std::size_t k = 0; k < t; ++k)
            out << ',' << tsv::format_double(weights.at(i, k));
        out << '\n';
    }
}

void write_attention_svg(std::ostream& out, const std::vector<std::string>& snp_ids, const Tensor& weights)
{
    const std::size_t s = weights.dim(0), t = weights.dim(1);
    constexpr int cell = 8, label = 90, top = 10;
    double hi = 0.0;
    for (double v : weights.data())
        hi = std::max(hi, v);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << label + cell * static_cast<int>(t) + 10
        << "\" height=\"" << top + cell * static_cast<int>(s) + 10 << "\" font-family=\"monospace\" font-size=\"7\">\n";
    for (std::size_t i = 0; i < s; ++i) {
        const int y = top + cell * static_cast<int>(i);
        out << "<text x=\"2\" y=\"" << y + cell - 1 << "\">" << snp_ids[i] << "</text>\n";
        for (std::size_t k = 0; k < t; ++k) {
            const double v = hi > 0.0 ? weights.at(i, k) / hi : 0.0;
            const int shade = 255 - static_cast<int>(v * 255.0);
            out << "<rect x=\"" << label + cell * static_cast<int>(k) << "\" y=\"" << y << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"rgb(255," << shade << ',' << shade << ")\"/>\n";
        }
    }
    out << "</svg>\n";
}

} // namespace deepg2p::cli
