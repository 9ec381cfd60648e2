#pragma once

#include "deepg2p/tables.hpp"
#include "deepg2p/tensor.hpp"

#include <array>
#include <string>
#include <string_view>

namespace deepg2p {

inline constexpr std::size_t kWeatherChannels = 9;
inline constexpr std::size_t kWeatherWindowDays = 5;
inline constexpr std::size_t kWeatherSeriesLength = 43;

/// Channel order of every WeatherSeries row.
inline constexpr std::array<std::string_view, kWeatherChannels> kWeatherChannelNames{
    "srad", "vp", "prcp", "tmax", "tmin", "wind", "dew_point", "rh", "gdd"};

// Magnus-form saturation vapor pressure constants.
inline constexpr double kMagnusA = 17.67;
inline constexpr double kMagnusB = 243.5;      // deg C
inline constexpr double kMagnusE0 = 611.2;     // Pa at 0 deg C

/// Saturation vapor pressure (Pa) at temperature t (deg C).
double saturation_vapor_pressure(double celsius);
/// Dew point (deg C) from actual vapor pressure (Pa); inverted Magnus formula.
double dew_point(double vapor_pressure_pa);
/// 100 * vp / es(mean temperature), clipped to [0, 100].
double relative_humidity(double vapor_pressure_pa, double tmax_c, double tmin_c);
/// Corn growing degree days (deg F days) with 50 F floor and 86 F cap.
double growing_degree_days(double tmax_c, double tmin_c);
double celsius_to_fahrenheit(double celsius);

/// Fills dew_point, rh and gdd. Throws DataError on vp <= 0 or tmax < tmin.
void derive_weather(DailyRecord& day);

struct WeatherSeries {
    std::string env_id;
    /// kWeatherChannels x target length of window means.
    Tensor values;
    /// Windows backed by data (the rest are padding).
    std::size_t observed_windows = 0;
};

std::array<double, kWeatherChannels> weather_channels(const DailyRecord& day);

/// Non-overlapping window means (the last window may be short), right-padded
/// with the per-channel mean of the observed windows, truncated if longer.
WeatherSeries window_and_pad(const DailyWeather& weather, std::size_t window = kWeatherWindowDays,
                             std::size_t target_length = kWeatherSeriesLength);

} // namespace deepg2p
