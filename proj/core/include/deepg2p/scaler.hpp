#pragma once

#include "deepg2p/tensor.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deepg2p {

/// Per-feature standardization, (x - mean) / std with population std.
///
/// A scaler remembers the identifier of the set it was fit on; transform()
/// takes the identifier the caller expects and refuses to run on a mismatch, so
/// validation and test rows can never be scaled by a refit.
class StandardScaler {
public:
    StandardScaler() = default;

    /// rows is N x F; throws NumericError if N == 0. Zero-variance features get
    /// std 1 and are flagged.
    static StandardScaler fit(const Tensor& rows, std::string fit_set_id,
                              std::vector<std::string> feature_names = {});

    Tensor transform(const Tensor& rows, std::string_view expected_fit_set_id) const;
    Tensor inverse_transform(const Tensor& rows) const;
    double transform_value(std::size_t feature, double x) const { return (x - means_[feature]) / stds_[feature]; }
    double inverse_value(std::size_t feature, double z) const { return z * stds_[feature] + means_[feature]; }

    std::size_t feature_count() const { return means_.size(); }
    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& stds() const { return stds_; }
    const std::vector<bool>& constant_flags() const { return constant_; }
    const std::vector<std::string>& feature_names() const { return names_; }
    const std::string& fit_set_id() const { return fit_set_id_; }

    nlohmann::json to_json() const;
    static StandardScaler from_json(const nlohmann::json& doc);

private:
    std::vector<std::string> names_;
    std::vector<double> means_;
    std::vector<double> stds_;
    std::vector<bool> constant_;
    std::string fit_set_id_;
};

inline StandardScaler fit_scaler(const Tensor& train_rows, std::string fit_set_id,
                                 std::vector<std::string> feature_names = {})
{
    return StandardScaler::fit(train_rows, std::move(fit_set_id), std::move(feature_names));
}

inline Tensor apply_scaler(const StandardScaler& scaler, const Tensor& rows, std::string_view expected_fit_set_id)
{
    return scaler.transform(rows, expected_fit_set_id);
}

} // namespace deepg2p
