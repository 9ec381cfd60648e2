#include "deepg2p/scaler.hpp"

#include "deepg2p/error.hpp"

#include <cmath>

namespace deepg2p {

StandardScaler StandardScaler::fit(const Tensor& rows, std::string fit_set_id,
                                   std::vector<std::string> feature_names)
{
    if (rows.empty() || rows.rank() != 2)
        throw NumericError("fit_scaler: need a non-empty N x F matrix");
    const std::size_t n = rows.dim(0);
    const std::size_t f = rows.dim(1);
    if (!feature_names.empty() && feature_names.size() != f)
        throw ShapeError("fit_scaler: " + std::to_string(feature_names.size()) + " names for " +
                         std::to_string(f) + " features");
    if (feature_names.empty())
        for (std::size_t j = 0; j < f; ++j)
            feature_names.push_back("f" + std::to_string(j));

    StandardScaler s;
    s.names_ = std::move(feature_names);
    s.fit_set_id_ = std::move(fit_set_id);
    s.means_.assign(f, 0.0);
    s.stds_.assign(f, 1.0);
    s.constant_.assign(f, false);
    for (std::size_t j = 0; j < f; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            mean += rows.at(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = rows.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        if (!std::isfinite(mean) || !std::isfinite(var))
            throw NumericError("fit_scaler: non-finite statistics for feature '" + s.names_[j] + "'");
        s.means_[j] = mean;
        const double sd = std::sqrt(var);
        // Relative threshold: values that are constant up to roundoff count as constant.
        if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
            s.constant_[j] = true;
            s.stds_[j] = 1.0;
        } else {
            s.stds_[j] = sd;
        }
    }
    return s;
}

Tensor StandardScaler::transform(const Tensor& rows, std::string_view expected_fit_set_id) const
{
    if (expected_fit_set_id != fit_set_id_)
        throw DataError("scaler was fit on '" + fit_set_id_ + "' but caller expected '" +
                        std::string(expected_fit_set_id) + "'");
    if (rows.rank() != 2 || rows.dim(1) != means_.size())
        throw ShapeError("scaler expects N x " + std::to_string(means_.size()) + " rows, got " +
                         shape_string(rows.shape()));
    Tensor out = rows;
    for (std::size_t i = 0; i < rows.dim(0); ++i)
        for (std::size_t j = 0; j < means_.size(); ++j)
            out.at(i, j) = transform_value(j, rows.at(i, j));
    return out;
}

Tensor StandardScaler::inverse_transform(const Tensor& rows) const
{
    if (rows.rank() != 2 || rows.dim(1) != means_.size())
        throw ShapeError("scaler expects N x " + std::to_string(means_.size()) + " rows, got " +
                         shape_string(rows.shape()));
    Tensor out = rows;
    for (std::size_t i = 0; i < rows.dim(0); ++i)
        for (std::size_t j = 0; j < means_.size(); ++j)
            out.at(i, j) = inverse_value(j, rows.at(i, j));
    return out;
}

nlohmann::json StandardScaler::to_json() const
{
    nlohmann::json doc;
    doc["fit_set_id"] = fit_set_id_;
    doc["feature_names"] = names_;
    doc["means"] = means_;
    doc["stds"] = stds_;
    std::vector<bool> flags = constant_;
    doc["constant"] = flags;
    return doc;
}

StandardScaler StandardScaler::from_json(const nlohmann::json& doc)
{
    StandardScaler s;
    try {
        s.fit_set_id_ = doc.at("fit_set_id").get<std::string>();
        s.names_ = doc.at("feature_names").get<std::vector<std::string>>();
        s.means_ = doc.at("means").get<std::vector<double>>();
        s.stds_ = doc.at("stds").get<std::vector<double>>();
        s.constant_ = doc.at("constant").get<std::vector<bool>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed scaler document: ") + e.what());
    }
    const std::size_t f = s.means_.size();
    if (s.names_.size() != f || s.stds_.size() != f || s.constant_.size() != f)
        throw DataError("malformed scaler document: inconsistent feature counts");
    for (double sd : s.stds_)
        if (!(sd > 0.0))
            throw DataError("malformed scaler document: non-positive std");
    return s;
}

} // namespace deepg2p
