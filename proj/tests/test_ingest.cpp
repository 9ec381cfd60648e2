#include "deepg2p/dataset.hpp"
#include "deepg2p/error.hpp"
#include "deepg2p/rng.hpp"
#include "deepg2p/scaler.hpp"
#include "deepg2p/synth.hpp"
#include "deepg2p/tables.hpp"
#include "deepg2p/tsv.hpp"
#include "deepg2p/weather.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace deepg2p;

namespace {

const char* kGenotypes = "snp_id\tchrom\tpos\tcontext\tH1\tH2\tH3\n"
                         "s1\t1\t100\tAACGG\tC\tK\tS\n"
                         "s2\t3\t2500\tTTAGC\tA\tA\tR\n";

std::string error_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

DailyWeather constant_weather(std::size_t days, double value)
{
    DailyWeather w;
    w.env_id = "L_2020";
    for (std::size_t d = 0; d < days; ++d) {
        DailyRecord r;
        r.srad = r.vp = r.prcp = r.tmax = r.tmin = r.wind = value;
        r.dew_point = r.rh = r.gdd = value;
        w.days.push_back(r);
    }
    return w;
}

} // namespace

TEST_CASE("genotype parsing")
{
    std::istringstream in(kGenotypes);
    const GenotypeTable t = read_genotypes(in);
    CHECK(t.hybrid_count() == 3);
    CHECK(t.snp_count() == 2);
    CHECK(t.call(1, 0) == 'K');
    CHECK(t.call(2, 1) == 'R');
    CHECK(t.snps[1].chromosome == 3);
    CHECK(t.snps[1].position == 2500);
    CHECK(t.snps[0].reference_base() == 'C');

    std::string bad = kGenotypes;
    bad.replace(bad.find("\tS\n"), 3, "\tZ\n");
    std::istringstream bad_in(bad);
    const std::string msg = error_of([&] { read_genotypes(bad_in); });
    CHECK(msg.find("genotypes.tsv:2") != std::string::npos);
    CHECK(msg.find("H3") != std::string::npos);
    CHECK(msg.find("column 7") != std::string::npos);

    std::string dup = kGenotypes;
    dup.replace(dup.find("s2\t"), 3, "s1\t");
    std::istringstream dup_in(dup);
    CHECK(error_of([&] { read_genotypes(dup_in); }).find("duplicate snp id") != std::string::npos);

    for (const char* text : {"", "snp_id\tchrom\tpos\tcontext\n", "snp\tchrom\tpos\tcontext\tH1\n",
                             "snp_id\tchrom\tpos\tcontext\tH1\ns1\t11\t5\tA\tA\n",
                             "snp_id\tchrom\tpos\tcontext\tH1\ns1\t1\t5\tAC\tA\n",
                             "snp_id\tchrom\tpos\tcontext\tH1\ns1\t1\t0\tA\tA\n",
                             "snp_id\tchrom\tpos\tcontext\tH1\ns1\t1\t5\tA\n",
                             "snp_id\tchrom\tpos\tcontext\tH1\tH1\ns1\t1\t5\tA\tA\tA\n"}) {
        std::istringstream s(text);
        CHECK_THROWS_AS(read_genotypes(s), DataError);
    }
}

TEST_CASE("tables round-trip")
{
    std::istringstream in(kGenotypes);
    const GenotypeTable t = read_genotypes(in);
    std::ostringstream out;
    write_genotypes(out, t);
    std::istringstream again(out.str());
    CHECK(read_genotypes(again) == t);

    SynthConfig config;
    config.hybrids = 6;
    config.environments = 3;
    config.snps = 4;
    config.causal = 2;
    config.interactions = 1;
    config.season_days = 60;
    config.summary_days = 10;
    const SynthData d = generate(config);

    std::ostringstream w;
    write_weather_daily(w, d.weather);
    std::istringstream win(w.str());
    const auto weather = read_weather_daily(win);
    REQUIRE(weather.size() == d.weather.size());
    for (std::size_t e = 0; e < weather.size(); ++e) {
        REQUIRE(weather[e].days.size() == d.weather[e].days.size());
        for (std::size_t k = 0; k < weather[e].days.size(); ++k)
            CHECK(weather[e].days[k] == d.weather[e].days[k]);
    }

    std::ostringstream s;
    write_features(s, d.soil);
    std::istringstream sin(s.str());
    const FeatureTable soil = read_features(sin, kSoilFeatures, "soil.tsv");
    CHECK(soil.env_ids == d.soil.env_ids);
    CHECK(soil.feature_names == d.soil.feature_names);
    CHECK(soil.rows == d.soil.rows);

    std::ostringstream p;
    write_phenotypes(p, d.observations);
    std::istringstream pin(p.str());
    CHECK(read_phenotypes(pin) == d.observations);
}

TEST_CASE("weather, feature and phenotype parse errors")
{
    std::istringstream short_header("env_id\tdate\tsrad\n");
    CHECK_THROWS_AS(read_weather_daily(short_header), DataError);
    std::istringstream bad_date("env_id\tdate\tsrad\tvp\tprcp\ttmax\ttmin\twind\nL_2020\t2020-13-01\t1\t1000\t0\t20\t10\t1\n");
    CHECK_THROWS_AS(read_weather_daily(bad_date), DataError);
    std::istringstream order("env_id\tdate\tsrad\tvp\tprcp\ttmax\ttmin\twind\n"
                             "L_2020\t2020-05-02\t1\t1000\t0\t20\t10\t1\n"
                             "L_2020\t2020-05-01\t1\t1000\t0\t20\t10\t1\n");
    CHECK_THROWS_AS(read_weather_daily(order), DataError);
    std::istringstream inverted("env_id\tdate\tsrad\tvp\tprcp\ttmax\ttmin\twind\nL_2020\t2020-05-01\t1\t1000\t0\t5\t10\t1\n");
    CHECK_THROWS_AS(read_weather_daily(inverted), DataError);

    std::istringstream features("env_id\ta\tb\nL_2020\t1\tNA\nM_2021\t2\t3\n");
    const FeatureTable t = read_features(features, 2, "soil.tsv");
    CHECK(std::isnan(t.rows[0][1]));
    CHECK(t.rows[1][1] == 3.0);
    std::istringstream wrong_width("env_id\ta\nL_2020\t1\n");
    CHECK_THROWS_AS(read_features(wrong_width, 2, "soil.tsv"), DataError);
    std::istringstream bad_env("env_id\ta\nL2020\t1\n");
    CHECK_THROWS_AS(read_features(bad_env, 1, "soil.tsv"), DataError);
    std::istringstream bad_number("env_id\ta\nL_2020\tabc\n");
    CHECK_THROWS_AS(read_features(bad_number, 1, "soil.tsv"), DataError);

    std::istringstream pheno("env_id\thybrid_id\tyield\nL_2020\tH1\t10.5\n");
    CHECK(read_phenotypes(pheno).front().yield == 10.5);
    std::istringstream bad_yield("env_id\thybrid_id\tyield\nL_2020\tH1\tx\n");
    CHECK_THROWS_AS(read_phenotypes(bad_yield), DataError);

    CHECK(split_env_id("Ames_2019") == std::make_pair(std::string("Ames"), 2019));
    CHECK_THROWS_AS(split_env_id("Ames"), DataError);
    CHECK_THROWS_AS(split_env_id("Ames_19x"), DataError);
    CHECK_THROWS_AS(parse_genotypes("/nonexistent/genotypes.tsv"), DataError);
}

TEST_CASE("weather derivation fixed points")
{
    CHECK(std::abs(dew_point(611.2)) <= 0.1);
    CHECK(growing_degree_days(30.0, 10.0) == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(growing_degree_days(40.0, 0.0) == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(growing_degree_days(5.0, 0.0) == 0.0);
    CHECK(celsius_to_fahrenheit(100.0) == doctest::Approx(212.0));
    CHECK(saturation_vapor_pressure(0.0) == doctest::Approx(611.2));

    DailyRecord day;
    day.vp = 1200;
    day.tmax = 28;
    day.tmin = 14;
    derive_weather(day);
    CHECK(day.dew_point == doctest::Approx(dew_point(1200)));
    CHECK(day.rh == doctest::Approx(relative_humidity(1200, 28, 14)));
    CHECK(day.gdd == doctest::Approx(growing_degree_days(28, 14)));
    day.vp = 0.0;
    CHECK_THROWS_AS(derive_weather(day), DataError);

    RngStream rng(3, "weather-property");
    for (int i = 0; i < 5000; ++i) {
        const double tmin = rng.uniform(-30, 45);
        const double tmax = tmin + rng.uniform(0, 25);
        CHECK(growing_degree_days(tmax, tmin) >= 0.0);
        const double rh = relative_humidity(rng.uniform(1, 8000), tmax, tmin);
        CHECK(rh >= 0.0);
        CHECK(rh <= 100.0);
    }
}

TEST_CASE("window and pad")
{
    const WeatherSeries full = window_and_pad(constant_weather(215, 1.0));
    CHECK(full.values.shape() == Shape{9, 43});
    CHECK(full.observed_windows == 43);

    const WeatherSeries tenth = window_and_pad(constant_weather(10, 2.5));
    CHECK(tenth.observed_windows == 2);
    for (double v : tenth.values.data())
        CHECK(v == 2.5);

    DailyWeather seven = constant_weather(7, 0.0);
    for (std::size_t d = 0; d < 7; ++d)
        seven.days[d].srad = static_cast<double>(d + 1);
    const WeatherSeries s7 = window_and_pad(seven);
    CHECK(s7.values.at(0, 0) == 3.0);
    CHECK(s7.values.at(0, 1) == 6.5);
    CHECK(s7.values.at(0, 2) == 4.75);

    const WeatherSeries longer = window_and_pad(constant_weather(400, 1.0));
    CHECK(longer.values.shape() == Shape{9, 43});
    CHECK(longer.observed_windows == 43);
    CHECK_THROWS_AS(window_and_pad(constant_weather(0, 1.0)), DataError);
}

TEST_CASE("standard scaler")
{
    const Tensor rows({4, 2}, {1, 5, 2, 5, 3, 5, 6, 5});
    const StandardScaler s = fit_scaler(rows, "train", {"a", "b"});
    CHECK(s.constant_flags() == std::vector<bool>{false, true});
    CHECK(s.stds()[1] == 1.0);
    const Tensor scaled = apply_scaler(s, rows, "train");
    double mean = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        mean += scaled.at(i, 0);
        CHECK(scaled.at(i, 1) == 0.0);
    }
    CHECK(std::abs(mean / 4) <= 1e-10);

    const Tensor one({1, 2}, {10, 7});
    const Tensor t = apply_scaler(s, one, "train");
    CHECK(t.at(0, 0) == doctest::Approx((10 - s.means()[0]) / s.stds()[0]));
    CHECK(t.at(0, 1) == 2.0);
    CHECK(s.inverse_transform(t).at(0, 0) == doctest::Approx(10));

    CHECK_THROWS_AS(apply_scaler(s, one, "fold1:train"), DataError);
    CHECK_THROWS_AS(apply_scaler(s, Tensor({1, 3}), "train"), ShapeError);

    const StandardScaler back = StandardScaler::from_json(s.to_json());
    CHECK(back.means() == s.means());
    CHECK(back.stds() == s.stds());
    CHECK(back.fit_set_id() == "train");
    CHECK(back.feature_names() == s.feature_names());
    CHECK_THROWS_AS(StandardScaler::from_json(nlohmann::json{{"means", 1}}), DataError);
}

TEST_CASE("dataset assembly")
{
    SynthConfig config;
    config.hybrids = 8;
    config.environments = 4;
    config.snps = 5;
    config.causal = 2;
    config.interactions = 1;
    config.season_days = 100;
    config.season_jitter = 30;
    config.summary_days = 10;
    SynthData d = generate(config);
    d.genotypes.calls[3] = 'N';

    const Dataset ds = assemble_dataset(d.genotypes, d.weather, d.soil, d.management, d.observations);
    CHECK(ds.resolved_missing_calls == 1);
    CHECK(ds.weather.size() == 4);
    for (const auto& w : ds.weather)
        CHECK(w.values.shape() == Shape{9, 43});
    CHECK(ds.observations.size() == 32);
    CHECK(std::is_sorted(ds.observations.begin(), ds.observations.end(), [](const auto& a, const auto& b) {
        return std::tie(a.env_id, a.hybrid_id) < std::tie(b.env_id, b.hybrid_id);
    }));
    CHECK(ds.observed_envs().size() == 4);
    CHECK(ds.observed_hybrids().size() == 8);

    auto obs = d.observations;
    obs.push_back(obs.front());
    CHECK_THROWS_AS(assemble_dataset(d.genotypes, d.weather, d.soil, d.management, obs), DataError);
    obs = d.observations;
    obs.front().hybrid_id = "H99999";
    CHECK_THROWS_AS(assemble_dataset(d.genotypes, d.weather, d.soil, d.management, obs), DataError);
    obs = d.observations;
    obs.front().yield = std::nan("");
    CHECK_THROWS_AS(assemble_dataset(d.genotypes, d.weather, d.soil, d.management, obs), DataError);
    auto weather = d.weather;
    weather.pop_back();
    CHECK_THROWS_AS(assemble_dataset(d.genotypes, weather, d.soil, d.management, d.observations), DataError);

    const auto dir = std::filesystem::temp_directory_path() / "deepg2p_test_ingest";
    std::filesystem::remove_all(dir);
    write_synth(d, dir);
    const Dataset loaded = load_dataset(DataPaths::in_directory(dir));
    CHECK(loaded.observations == ds.observations);
    CHECK(loaded.genotypes == ds.genotypes);
    std::filesystem::remove_all(dir);
}

TEST_CASE("tsv helpers")
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678, 0.0})
        CHECK(tsv::try_parse_double(tsv::format_double(v)).value() == v);
    CHECK_FALSE(tsv::try_parse_double("1.5x").has_value());
    CHECK_FALSE(tsv::try_parse_int("").has_value());
    CHECK(tsv::try_parse_int("-42").value() == -42);
    CHECK(tsv::split("a\t\tb").size() == 3);
    std::istringstream in("x\r\ny\n");
    tsv::LineReader r(in, "f");
    std::string line;
    REQUIRE(r.next(line));
    CHECK(line == "x");
    REQUIRE(r.next(line));
    CHECK(r.where("bad") == "f:2: bad");
}
