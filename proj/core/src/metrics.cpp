#include "deepg2p/metrics.hpp"

#include "deepg2p/error.hpp"
#include "deepg2p/tsv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace deepg2p {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw ShapeError("metrics: prediction and truth differ in length");
    if (a.size() < 2)
        throw DataError("metrics: need at least two values");
}

} // namespace

double rmse(std::span<const double> prediction, std::span<const double> truth)
{
    check_pair(prediction, truth);
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = prediction[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(truth.size()));
}

std::optional<double> pearson(std::span<const double> prediction, std::span<const double> truth)
{
    check_pair(prediction, truth);
    const double n = static_cast<double>(truth.size());
    double mp = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        mp += prediction[i];
        mt += truth[i];
    }
    mp /= n;
    mt /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double dp = prediction[i] - mp;
        const double dt = truth[i] - mt;
        sxy += dp * dt;
        sxx += dp * dp;
        syy += dt * dt;
    }
    if (sxx == 0.0 || syy == 0.0)
        return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Metrics evaluate(std::span<const double> prediction, std::span<const double> truth)
{
    return {pearson(prediction, truth), rmse(prediction, truth), truth.size()};
}

nlohmann::json Metrics::to_json() const
{
    nlohmann::json doc{{"rmse", rmse}, {"count", count}};
    doc["pearson"] = pearson ? nlohmann::json(*pearson) : nlohmann::json(nullptr);
    return doc;
}

Summary summarize(std::span<const double> values)
{
    Summary s;
    s.count = values.size();
    if (values.empty())
        return s;
    for (double v : values)
        s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values)
            ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

Summary MetricReport::test_pearson() const
{
    std::vector<double> v;
    for (const auto& f : folds)
        if (f.test.pearson)
            v.push_back(*f.test.pearson);
    return summarize(v);
}

Summary MetricReport::test_rmse() const
{
    std::vector<double> v;
    for (const auto& f : folds)
        v.push_back(f.test.rmse);
    return summarize(v);
}

Summary MetricReport::validation_rmse() const
{
    std::vector<double> v;
    for (const auto& f : folds)
        v.push_back(f.validation.rmse);
    return summarize(v);
}

namespace {

nlohmann::json summary_json(const Summary& s)
{
    return {{"mean", s.mean}, {"std", s.stddev}, {"count", s.count}};
}

Metrics metrics_from_json(const nlohmann::json& j)
{
    Metrics m;
    m.rmse = j.at("rmse").get<double>();
    m.count = j.at("count").get<std::size_t>();
    if (!j.at("pearson").is_null())
        m.pearson = j.at("pearson").get<double>();
    return m;
}

} // namespace

nlohmann::json MetricReport::to_json() const
{
    nlohmann::json doc;
    doc["split_mode"] = split_mode;
    doc["variant"] = variant;
    doc["folds"] = nlohmann::json::array();
    for (const auto& f : folds) {
        nlohmann::json history = nlohmann::json::array();
        for (const auto& e : f.history)
            history.push_back({e.epoch, e.train_loss, e.validation_rmse});
        doc["folds"].push_back({{"fold", f.fold},
                                {"validation", f.validation.to_json()},
                                {"test", f.test.to_json()},
                                {"best_epoch", f.best_epoch},
                                {"history", history}});
    }
    doc["summary"] = {{"test_pearson", summary_json(test_pearson())},
                      {"test_rmse", summary_json(test_rmse())},
                      {"validation_rmse", summary_json(validation_rmse())}};
    return doc;
}

MetricReport MetricReport::from_json(const nlohmann::json& doc)
{
    MetricReport r;
    try {
        r.split_mode = doc.at("split_mode").get<std::string>();
        r.variant = doc.at("variant").get<std::string>();
        for (const auto& j : doc.at("folds")) {
            FoldMetrics f;
            f.fold = j.at("fold").get<std::size_t>();
            f.validation = metrics_from_json(j.at("validation"));
            f.test = metrics_from_json(j.at("test"));
            f.best_epoch = j.at("best_epoch").get<std::size_t>();
            for (const auto& e : j.at("history"))
                f.history.push_back({e.at(0).get<std::size_t>(), e.at(1).get<double>(), e.at(2).get<double>()});
            r.folds.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed metric report: ") + e.what());
    }
    return r;
}

void MetricReport::write_tsv(std::ostream& out) const
{
    out << "fold\tsplit_mode\tvariant\tpearson\trmse\n";
    for (const auto& f : folds)
        out << f.fold << '\t' << split_mode << '\t' << variant << '\t'
            << (f.test.pearson ? tsv::format_double(*f.test.pearson) : std::string("NA")) << '\t'
            << tsv::format_double(f.test.rmse) << '\n';
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history)
{
    out << "epoch,train_loss,validation_rmse\n";
    for (const auto& e : history)
        out << e.epoch << ',' << tsv::format_double(e.train_loss) << ',' << tsv::format_double(e.validation_rmse)
            << '\n';
}

} // namespace deepg2p
