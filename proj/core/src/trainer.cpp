#include "deepg2p/trainer.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/ops.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace deepg2p {

void TrainConfig::validate() const
{
    if (batch_size == 0 || max_epochs == 0)
        throw ConfigError("train: batch_size and max_epochs must be positive");
    if (!(adam.learning_rate > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
        !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0))
        throw ConfigError("train: invalid Adam coefficients");
}

nlohmann::json TrainConfig::to_json() const
{
    return {{"learning_rate", adam.learning_rate},
            {"beta1", adam.beta1},
            {"beta2", adam.beta2},
            {"epsilon", adam.epsilon},
            {"batch_size", batch_size},
            {"max_epochs", max_epochs},
            {"patience", patience}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& doc, TrainConfig c)
{
    if (!doc.is_object())
        throw ConfigError("train: config must be an object");
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "learning_rate") c.adam.learning_rate = value.get<double>();
            else if (key == "beta1") c.adam.beta1 = value.get<double>();
            else if (key == "beta2") c.adam.beta2 = value.get<double>();
            else if (key == "epsilon") c.adam.epsilon = value.get<double>();
            else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
            else if (key == "max_epochs") c.max_epochs = value.get<std::size_t>();
            else if (key == "patience") c.patience = value.get<std::size_t>();
            else
                throw ConfigError("train." + key + ": unknown field");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("train." + key + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

std::vector<double> predict_rows(const ModelParams& params, const TrainingData& data, std::span<const SampleRow> rows,
                                 std::size_t batch_size)
{
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t start = 0; start < rows.size(); start += batch_size) {
        const auto batch = rows.subspan(start, std::min(batch_size, rows.size() - start));
        const auto pred = predict(params, data.gather(batch));
        out.insert(out.end(), pred.begin(), pred.end());
    }
    return out;
}

namespace {

double standardized_rmse(const ModelParams& params, const TrainingData& data, std::span<const SampleRow> rows)
{
    const auto pred = predict_rows(params, data, rows);
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double d = pred[i] - rows[i].target;
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(rows.size()));
}

} // namespace

TrainResult train_model(const ModelConfig& config, const TrainingData& data, std::span<const SampleRow> train,
                        std::span<const SampleRow> validation, const TrainConfig& schedule, const RngStream& rng,
                        double target_std)
{
    schedule.validate();
    if (train.empty() || validation.empty())
        throw DataError("train: training and validation sets must be non-empty");

    TrainResult result;
    ModelParams params = init_params(config, rng.fork("init"));
    Adam optimizer(schedule.adam);
    result.params = params;
    result.best_validation_rmse = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    std::vector<std::size_t> order(train.size());
    std::vector<SampleRow> batch_rows;
    for (std::size_t epoch = 0; epoch < schedule.max_epochs; ++epoch) {
        const RngStream epoch_rng = rng.fork("epoch" + std::to_string(epoch));
        std::iota(order.begin(), order.end(), std::size_t{0});
        RngStream perm = epoch_rng.fork("permutation");
        perm.shuffle(std::span<std::size_t>(order));

        double loss_sum = 0.0;
        for (std::size_t start = 0, b = 0; start < order.size(); start += schedule.batch_size, ++b) {
            const std::size_t n = std::min(schedule.batch_size, order.size() - start);
            batch_rows.clear();
            Tensor target({n});
            for (std::size_t i = 0; i < n; ++i) {
                batch_rows.push_back(train[order[start + i]]);
                target.data()[i] = batch_rows.back().target;
            }
            RngStream dropout = epoch_rng.fork("dropout" + std::to_string(b));
            ComputationRecord rec(&params.store);
            double loss = 0.0;
            try {
                const ForwardOutput out = model_forward(rec, params, data.gather(batch_rows), Mode::train, &dropout);
                const Var l = ops::mse_loss(rec, out.prediction, rec.constant(std::move(target), "target"));
                loss = rec.value(l).data()[0];
                rec.backward(l);
            } catch (const NumericError& e) {
                throw NumericError("epoch " + std::to_string(epoch) + " batch " + std::to_string(b) + ": " + e.what());
            }
            optimizer.step(params.store);
            loss_sum += loss * static_cast<double>(n);
        }

        const double val = target_std * standardized_rmse(params, data, validation);
        if (!std::isfinite(val))
            throw NumericError("epoch " + std::to_string(epoch) + ": non-finite validation RMSE");
        result.history.push_back({epoch, loss_sum / static_cast<double>(order.size()), val});
        if (val < result.best_validation_rmse) {
            result.best_validation_rmse = val;
            result.best_epoch = epoch;
            result.params = params;
            since_best = 0;
        } else if (++since_best >= schedule.patience) {
            break;
        }
    }
    return result;
}

} // namespace deepg2p
