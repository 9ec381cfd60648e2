#include "deepg2p/weather.hpp"

#include "deepg2p/error.hpp"

#include <algorithm>
#include <cmath>

namespace deepg2p {

double saturation_vapor_pressure(double celsius)
{
    return kMagnusE0 * std::exp(kMagnusA * celsius / (kMagnusB + celsius));
}

double dew_point(double vapor_pressure_pa)
{
    if (!(vapor_pressure_pa > 0.0))
        throw DataError("vapor pressure must be positive to derive dew point");
    const double gamma = std::log(vapor_pressure_pa / kMagnusE0);
    return kMagnusB * gamma / (kMagnusA - gamma);
}

double relative_humidity(double vapor_pressure_pa, double tmax_c, double tmin_c)
{
    const double mean_temp = 0.5 * (tmax_c + tmin_c);
    const double rh = 100.0 * vapor_pressure_pa / saturation_vapor_pressure(mean_temp);
    return std::clamp(rh, 0.0, 100.0);
}

double celsius_to_fahrenheit(double celsius)
{
    return celsius * 9.0 / 5.0 + 32.0;
}

double growing_degree_days(double tmax_c, double tmin_c)
{
    const double hi = std::min(celsius_to_fahrenheit(tmax_c), 86.0);
    const double lo = std::max(celsius_to_fahrenheit(tmin_c), 50.0);
    return std::max(0.0, (hi + lo) / 2.0 - 50.0);
}

void derive_weather(DailyRecord& day)
{
    if (!(day.vp > 0.0))
        throw DataError("vapor pressure must be positive, got " + std::to_string(day.vp));
    if (day.tmax < day.tmin)
        throw DataError("tmax " + std::to_string(day.tmax) + " is below tmin " + std::to_string(day.tmin));
    day.dew_point = dew_point(day.vp);
    day.rh = relative_humidity(day.vp, day.tmax, day.tmin);
    day.gdd = growing_degree_days(day.tmax, day.tmin);
}

std::array<double, kWeatherChannels> weather_channels(const DailyRecord& day)
{
    return {day.srad, day.vp, day.prcp, day.tmax, day.tmin, day.wind, day.dew_point, day.rh, day.gdd};
}

WeatherSeries window_and_pad(const DailyWeather& weather, std::size_t window, std::size_t target_length)
{
    if (weather.days.empty())
        throw DataError("weather for '" + weather.env_id + "' has no days");
    if (window == 0 || target_length == 0)
        throw ConfigError("window and target length must be positive");

    const std::size_t n_days = weather.days.size();
    const std::size_t n_windows = std::min((n_days + window - 1) / window, target_length);
    WeatherSeries series{weather.env_id, Tensor({kWeatherChannels, target_length}), n_windows};

    std::array<double, kWeatherChannels> window_total_sum{};
    for (std::size_t w = 0; w < n_windows; ++w) {
        const std::size_t begin = w * window;
        const std::size_t end = std::min(begin + window, n_days);
        std::array<double, kWeatherChannels> acc{};
        for (std::size_t d = begin; d < end; ++d) {
            auto ch = weather_channels(weather.days[d]);
            for (std::size_t c = 0; c < kWeatherChannels; ++c)
                acc[c] += ch[c];
        }
        for (std::size_t c = 0; c < kWeatherChannels; ++c) {
            const double mean = acc[c] / static_cast<double>(end - begin);
            series.values.at(c, w) = mean;
            window_total_sum[c] += mean;
        }
    }
    for (std::size_t c = 0; c < kWeatherChannels; ++c) {
        const double pad = window_total_sum[c] / static_cast<double>(n_windows);
        for (std::size_t w = n_windows; w < target_length; ++w)
            series.values.at(c, w) = pad;
    }
    return series;
}

} // namespace deepg2p
