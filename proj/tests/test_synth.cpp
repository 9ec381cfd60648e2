#include "support.hpp"

#include "deepg2p/dataset.hpp"
#include "deepg2p/error.hpp"
#include "deepg2p/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace deepg2p;
using namespace deepg2p::testing;
namespace fs = std::filesystem;

namespace {

/// The two alleles of a call letter.
std::pair<char, char> alleles(char call)
{
    switch (call) {
    case 'R': return {'A', 'G'};
    case 'Y': return {'C', 'T'};
    case 'S': return {'G', 'C'};
    case 'W': return {'A', 'T'};
    case 'K': return {'G', 'T'};
    case 'M': return {'A', 'C'};
    default: return {call, call};
    }
}

int oracle_dosage(char call, char reference)
{
    const auto [a, b] = alleles(call);
    return (a != reference) + (b != reference);
}

double oracle_mean(const DailyWeather& w, std::size_t channel, std::size_t first, std::size_t days)
{
    double s = 0;
    std::size_t n = 0;
    for (std::size_t d = first; d < first + days && d < w.days.size(); ++d, ++n) {
        const DailyRecord& r = w.days[d];
        const double v[] = {r.srad, r.vp, r.prcp, r.tmax, r.tmin, r.wind};
        s += v[channel];
    }
    return s / static_cast<double>(n);
}

/// Direct evaluation of the generative model.
std::vector<double> oracle_yields(const SynthData& d)
{
    std::map<std::string, const DailyWeather*> weather;
    for (const auto& w : d.weather)
        weather[w.env_id] = &w;
    const bool thr = d.truth.mode == EffectMode::threshold;
    auto dose = [&](std::size_t h, const std::string& snp) {
        const std::size_t c = d.genotypes.snp_index(snp);
        const int k = oracle_dosage(d.genotypes.call(h, c), d.genotypes.snps[c].reference_base());
        return thr ? (k >= 1 ? 1.0 : 0.0) : double(k);
    };
    std::vector<double> out;
    for (const auto& o : d.observations) {
        const std::size_t h = d.genotypes.hybrid_index(o.hybrid_id);
        double y = d.truth.mean_yield;
        const auto& s = d.soil.rows[d.soil.index(o.env_id)];
        for (std::size_t j = 0; j < s.size(); ++j)
            y += d.truth.soil_gamma[j] * s[j];
        const auto& m = d.management.rows[d.management.index(o.env_id)];
        for (std::size_t j = 0; j < m.size(); ++j)
            y += d.truth.management_gamma[j] * m[j];
        for (const auto& c : d.truth.causal)
            y += c.beta * dose(h, c.snp_id);
        for (const auto& ie : d.truth.interactions) {
            double z = (oracle_mean(*weather.at(o.env_id), ie.channel, ie.first_day, ie.days) - ie.summary_mean) /
                       ie.summary_std;
            if (thr)
                z = std::max(z, 0.0);
            y += ie.delta * dose(h, ie.snp_id) * z;
        }
        out.push_back(y);
    }
    return out;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("deepg2p_synth_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("no genetics and no noise leaves environment-only yields")
{
    SynthConfig c = small_synth_config(5);
    c.sigma = 0;
    c.causal = 0;
    c.interactions = 0;
    const SynthData d = generate(c);
    std::map<std::string, double> per_env;
    for (const auto& o : d.observations) {
        auto [it, fresh] = per_env.emplace(o.env_id, o.yield);
        CHECK(it->second == o.yield);
    }
    CHECK(per_env.size() == c.environments);
    CHECK(d.observations.size() == c.environments * c.hybrids);
}

TEST_CASE("noise-free yields match the direct evaluation")
{
    for (EffectMode mode : {EffectMode::linear, EffectMode::threshold}) {
        SynthConfig c = small_synth_config(6);
        c.sigma = 0;
        c.mode = mode;
        c.season_jitter = 20;
        c.summary_days = 40;
        const SynthData d = generate(c);
        const auto oracle = oracle_yields(d);
        const auto expected =
            expected_yields(d.truth, d.genotypes, d.weather, d.soil, d.management, d.observations);
        REQUIRE(oracle.size() == d.observations.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(d.observations[i].yield == doctest::Approx(oracle[i]).epsilon(1e-12).scale(0));
            CHECK(std::abs(expected[i] - oracle[i]) <= 1e-10);
        }
        CHECK(d.truth.interactions.size() == c.interactions);
        CHECK(d.truth.causal.size() == c.causal);
    }
}

TEST_CASE("same seed gives byte-identical files")
{
    const SynthConfig c = small_synth_config(7);
    const fs::path a = scratch("a"), b = scratch("b"), other = scratch("c");
    write_synth(generate(c), a);
    write_synth(generate(c), b);
    SynthConfig c2 = c;
    c2.seed = 8;
    write_synth(generate(c2), other);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        CHECK(slurp(entry.path()) == slurp(b / name));
        ++files;
    }
    CHECK(files == 6);
    CHECK(slurp(a / "phenotypes.tsv") != slurp(other / "phenotypes.tsv"));
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(other);
}

TEST_CASE("genotypes follow Hardy-Weinberg proportions")
{
    SynthConfig c;
    c.hybrids = 10000;
    c.snps = 20;
    c.causal = 2;
    c.interactions = 1;
    c.environments = 1;
    c.seed = 9;
    const SynthData d = generate(c);
    double chi2 = 0;
    for (std::size_t s = 0; s < c.snps; ++s) {
        double counts[3] = {0, 0, 0};
        for (std::size_t h = 0; h < c.hybrids; ++h)
            counts[oracle_dosage(d.genotypes.call(h, s), d.genotypes.snps[s].reference_base())] += 1;
        const double n = c.hybrids;
        const double q = (counts[1] + 2 * counts[2]) / (2 * n);
        CHECK(q >= c.allele_freq_min - 0.03);
        CHECK(q <= c.allele_freq_max + 0.03);
        const double expected[3] = {n * (1 - q) * (1 - q), 2 * n * q * (1 - q), n * q * q};
        for (int k = 0; k < 3; ++k)
            chi2 += (counts[k] - expected[k]) * (counts[k] - expected[k]) / expected[k];
    }
    // 20 one-degree-of-freedom statistics: the 0.9999 quantile of chi2(20) is about 52.4.
    CHECK(chi2 < 52.4);
}

TEST_CASE("generator output round-trips through ingest")
{
    SynthConfig c = small_synth_config(10);
    c.observed_fraction = 0.7;
    c.season_jitter = 10;
    const SynthData d = generate(c);
    CHECK(d.observations.size() < c.hybrids * c.environments);
    const fs::path dir = scratch("rt");
    write_synth(d, dir);
    const Dataset loaded = load_dataset(DataPaths::in_directory(dir));
    const Dataset direct = assemble_dataset(d.genotypes, d.weather, d.soil, d.management, d.observations);
    CHECK(loaded.genotypes == direct.genotypes);
    REQUIRE(loaded.observations.size() == direct.observations.size());
    for (std::size_t i = 0; i < loaded.observations.size(); ++i) {
        CHECK(loaded.observations[i].hybrid_id == direct.observations[i].hybrid_id);
        CHECK(loaded.observations[i].env_id == direct.observations[i].env_id);
        CHECK(loaded.observations[i].yield == direct.observations[i].yield);
    }
    REQUIRE(loaded.weather.size() == direct.weather.size());
    for (std::size_t e = 0; e < loaded.weather.size(); ++e)
        for (std::size_t i = 0; i < loaded.weather[e].values.size(); ++i)
            CHECK(loaded.weather[e].values[i] == doctest::Approx(direct.weather[e].values[i]).epsilon(1e-12));
    CHECK(loaded.soil.rows == direct.soil.rows);
    CHECK(GroundTruth::from_json(nlohmann::json::parse(slurp(dir / "ground_truth.json"))).to_json() ==
          d.truth.to_json());
    fs::remove_all(dir);
}

TEST_CASE("interaction columns explain the planted G*E variance")
{
    SynthConfig c;
    c.hybrids = 200;
    c.environments = 20;
    c.snps = 30;
    c.causal = 5;
    c.interactions = 3;
    c.delta_scale = 2;
    c.sigma = 0.5;
    c.seed = 11;
    const SynthData d = generate(c);
    std::map<std::string, std::size_t> env_col;
    for (const auto& o : d.observations)
        env_col.emplace(o.env_id, env_col.size());
    std::map<std::string, const DailyWeather*> weather;
    for (const auto& w : d.weather)
        weather[w.env_id] = &w;

    auto design = [&](bool with_interactions) {
        const std::size_t p = env_col.size() + c.causal + (with_interactions ? c.interactions : 0);
        Tensor x({d.observations.size(), p});
        for (std::size_t i = 0; i < d.observations.size(); ++i) {
            const auto& o = d.observations[i];
            const std::size_t h = d.genotypes.hybrid_index(o.hybrid_id);
            x.at(i, env_col.at(o.env_id)) = 1.0;
            std::size_t col = env_col.size();
            for (const auto& ce : d.truth.causal) {
                const std::size_t s = d.genotypes.snp_index(ce.snp_id);
                x.at(i, col++) = oracle_dosage(d.genotypes.call(h, s), d.genotypes.snps[s].reference_base());
            }
            if (with_interactions)
                for (const auto& ie : d.truth.interactions) {
                    const std::size_t s = d.genotypes.snp_index(ie.snp_id);
                    const double z = (oracle_mean(*weather.at(o.env_id), ie.channel, ie.first_day, ie.days) -
                                      ie.summary_mean) / ie.summary_std;
                    x.at(i, col++) = oracle_dosage(d.genotypes.call(h, s), d.genotypes.snps[s].reference_base()) * z;
                }
        }
        return x;
    };
    std::vector<double> y;
    for (const auto& o : d.observations)
        y.push_back(o.yield);
    const Tensor full = design(true), reduced = design(false);
    const auto bf = least_squares(full, y);
    const double mse_full = mean_squared_difference(fitted(full, bf), y);
    const double mse_reduced = mean_squared_difference(fitted(reduced, least_squares(reduced, y)), y);
    CHECK(mse_full == doctest::Approx(c.sigma * c.sigma).epsilon(0.1));
    CHECK(mse_reduced > 2.0 * mse_full);
    for (std::size_t i = 0; i < c.interactions; ++i)
        CHECK(bf[env_col.size() + c.causal + i] == doctest::Approx(d.truth.interactions[i].delta).epsilon(0.1));
}

TEST_CASE("generator configuration")
{
    SynthConfig c;
    CHECK_NOTHROW(c.validate());
    SynthConfig bad = c;
    bad.causal = c.snps + 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.interactions = c.causal + 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.allele_freq_min = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.sigma = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.summary_days = 300;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.observed_fraction = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    SynthConfig custom = c;
    custom.hybrids = 77;
    custom.mode = EffectMode::threshold;
    const SynthConfig parsed = SynthConfig::from_json(custom.to_json(), SynthConfig{});
    CHECK(parsed.to_json() == custom.to_json());
    CHECK(SynthConfig::from_json({{"sigma", 0.25}}, c).sigma == 0.25);
}
