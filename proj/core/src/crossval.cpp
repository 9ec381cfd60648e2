#include "deepg2p/crossval.hpp"

#include "deepg2p/error.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <exception>
#include <thread>

namespace deepg2p {

nlohmann::json FoldModel::to_json() const
{
    return {{"fold", fold}, {"preprocessing", preprocessor.to_json()}, {"model", params_to_json(params)}};
}

FoldModel FoldModel::from_json(const nlohmann::json& doc)
{
    try {
        FoldModel m;
        m.fold = doc.at("fold").get<std::size_t>();
        m.preprocessor = Preprocessor::from_json(doc.at("preprocessing"));
        m.params = params_from_json(doc.at("model"));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed fold model: ") + e.what());
    }
}

FoldMembers fold_members(const Dataset& data, const SplitPlan& plan, std::size_t rotation)
{
    const Rotation rot = plan.rotation(rotation);
    std::unordered_map<std::string, std::size_t> group;
    for (std::size_t g = 0; g < plan.groups.size(); ++g)
        for (const auto& u : plan.groups[g])
            group.emplace(u, g);
    FoldMembers m;
    for (std::size_t i = 0; i < data.observations.size(); ++i) {
        const std::string unit = plan.unit_of(data.observations[i]);
        auto it = group.find(unit);
        if (it == group.end())
            throw DataError("observation unit '" + unit + "' is not in the split plan");
        if (it->second == rot.test_group)
            m.test.push_back(i);
        else if (it->second == rot.validation_group)
            m.validation.push_back(i);
        else
            m.train.push_back(i);
    }
    return m;
}

std::vector<double> predict_observations(const Dataset& data, const FoldModel& model,
                                         std::span<const std::size_t> observations)
{
    const TrainingData encoded = model.preprocessor.encode(data, model.params.config);
    const auto rows = model.preprocessor.rows(data, observations);
    auto pred = predict_rows(model.params, encoded, rows);
    for (double& p : pred)
        p = model.preprocessor.target.inverse_value(0, p);
    return pred;
}

namespace {

SelectionReport run_selection(const Dataset& data, std::span<const std::size_t> observations,
                              const SelectionConfig& config)
{
    std::vector<std::size_t> hybrid_rows;
    std::vector<double> means;
    hybrid_mean_yields(data, observations, hybrid_rows, means);
    return select_snps(data.genotypes, hybrid_rows, means, config);
}

std::vector<double> yields(const Dataset& data, std::span<const std::size_t> observations)
{
    std::vector<double> y;
    for (std::size_t o : observations)
        y.push_back(data.observations[o].yield);
    return y;
}

FoldOutcome run_fold(const Dataset& data, const SplitPlan& plan, const CrossValConfig& config, std::size_t fold,
                     const std::optional<SelectionReport>& global, std::uint64_t seed)
{
    const FoldMembers members = fold_members(data, plan, fold);
    if (members.train.empty() || members.validation.empty() || members.test.empty())
        throw DataError("empty train, validation or test split");

    FoldOutcome out;
    ModelConfig model = config.model;
    std::vector<std::string> snp_ids;
    if (model.variant != Variant::no_g) {
        if (global)
            out.selection = global;
        else
            out.selection = run_selection(data, members.train, config.selection);
        snp_ids = out.selection->selected_ids();
        model.snp_count = snp_ids.size();
    }
    const std::string fit_id = "fold" + std::to_string(fold) + ":train";
    Preprocessor prep = Preprocessor::fit(data, members.train, std::move(snp_ids), fit_id);
    const TrainingData encoded = prep.encode(data, model);
    const auto train_rows = prep.rows(data, members.train);
    const auto val_rows = prep.rows(data, members.validation);
    const auto test_rows = prep.rows(data, members.test);

    const RngStream rng(seed, "fold" + std::to_string(fold));
    TrainResult trained = train_model(model, encoded, train_rows, val_rows, config.train, rng, prep.target.stds()[0]);

    out.model.fold = fold;
    out.model.preprocessor = std::move(prep);
    out.model.params = std::move(trained.params);
    auto to_original = [&](std::vector<double> z) {
        for (double& v : z)
            v = out.model.preprocessor.target.inverse_value(0, v);
        return z;
    };
    const auto val_pred = to_original(predict_rows(out.model.params, encoded, val_rows));
    out.test_predictions = to_original(predict_rows(out.model.params, encoded, test_rows));
    out.test_observations = members.test;

    out.metrics.fold = fold;
    out.metrics.validation = evaluate(val_pred, yields(data, members.validation));
    out.metrics.test = evaluate(out.test_predictions, yields(data, members.test));
    out.metrics.best_epoch = trained.best_epoch;
    out.metrics.history = std::move(trained.history);
    return out;
}

[[noreturn]] void rethrow_with_fold(std::exception_ptr error, std::size_t fold)
{
    const std::string prefix = "fold " + std::to_string(fold) + ": ";
    try {
        std::rethrow_exception(error);
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const NumericError& e) {
        throw NumericError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

} // namespace

CrossValResult cross_validate(const Dataset& data, const SplitPlan& plan, const CrossValConfig& config,
                              std::uint64_t seed)
{
    config.model.validate();
    config.train.validate();
    std::vector<std::size_t> rotations = config.rotations;
    if (rotations.empty())
        for (std::size_t r = 0; r < plan.folds(); ++r)
            rotations.push_back(r);
    std::sort(rotations.begin(), rotations.end());
    rotations.erase(std::unique(rotations.begin(), rotations.end()), rotations.end());
    for (std::size_t r : rotations)
        if (r >= plan.folds())
            throw ConfigError("rotation " + std::to_string(r) + " out of range for " +
                              std::to_string(plan.folds()) + " folds");

    std::optional<SelectionReport> global;
    if (config.global_selection && config.model.variant != Variant::no_g) {
        std::vector<std::size_t> all(data.observations.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        global = run_selection(data, all, config.selection);
    }

    std::vector<std::optional<FoldOutcome>> outcomes(rotations.size());
    std::vector<std::exception_ptr> errors(rotations.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rotations.size(); i = next++) {
            try {
                outcomes[i] = run_fold(data, plan, config, rotations[i], global, seed);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, rotations.size());
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    for (std::size_t i = 0; i < rotations.size(); ++i)
        if (errors[i])
            rethrow_with_fold(errors[i], rotations[i]);

    CrossValResult result;
    result.report.split_mode = std::string(split_mode_name(plan.mode));
    result.report.variant = std::string(variant_name(config.model.variant));
    for (auto& o : outcomes) {
        result.report.folds.push_back(o->metrics);
        result.folds.push_back(std::move(*o));
    }
    return result;
}

} // namespace deepg2p
