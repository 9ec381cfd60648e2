#include "support.hpp"

#include "deepg2p/crossval.hpp"
#include "deepg2p/encode.hpp"
#include "deepg2p/gbdt.hpp"
#include "deepg2p/kernels.hpp"
#include "deepg2p/mutual_info.hpp"
#include "deepg2p/selection.hpp"
#include "deepg2p/split.hpp"
#include "deepg2p/synth.hpp"
#include "deepg2p/weather.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace deepg2p;
using namespace deepg2p::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// 1. Analytic gradients against central differences on the tiny config.
Outcome gradient_correctness()
{
    const auto start = Clock::now();
    double worst = 0.0;
    std::string where;
    std::size_t checked = 0;
    for (Variant v : {Variant::full, Variant::no_ge, Variant::no_g}) {
        RngStream rng(1, "acceptance-gradients");
        const ModelConfig c = tiny_model_config(v);
        ModelParams params = init_params(c, RngStream(1, "init"));
        const ModelInputs in = random_inputs(c, 4, rng, true);
        const Tensor target = random_tensor({4}, rng);
        const GradCheck r = check_gradients(params.store, [&](ComputationRecord& rec) {
            const ForwardOutput out = model_forward(rec, params, in, Mode::inference);
            return ops::mse_loss(rec, out.prediction, rec.constant(target));
        });
        checked += r.checked;
        if (r.max_relative_error >= worst) {
            worst = r.max_relative_error;
            where = std::string(variant_name(v)) + ":" + r.worst_slot;
        }
        if (r.checked != params.store.parameter_count())
            return {false, "not every parameter was checked"};
    }
    const double secs = seconds_since(start);
    return {worst <= 1e-4 && secs < 60.0,
            fmt("%zu entries, max rel err %.2e at %s, %.1f s", checked, worst, where.c_str(), secs)};
}

// 2. IUPAC encoding and context matrix shape.
Outcome encoding_exactness()
{
    const std::string letters = "ACGTRYSWKM";
    for (char l : letters) {
        const auto v = encode_letter(l);
        double sum = 0;
        for (double x : v) {
            if (x < 0.0)
                return {false, fmt("negative entry for %c", l)};
            sum += x;
        }
        if (sum != 1.0)
            return {false, fmt("column for %c sums to %.17g", l, sum)};
    }
    const std::array<double, 4> k = encode_letter('K');
    const bool k_ok = k == std::array<double, 4>{0.0, 0.0, 0.5, 0.5};
    SnpDescriptor snp{"s1", 1, 100, "ACGTA"};
    const Tensor m = build_context_matrix(snp, 'K', 2);
    const bool shape_ok = m.shape() == Shape{4, 5};
    return {k_ok && shape_ok, fmt("10 letters column-stochastic, K exact: %s, context %zux%zu", k_ok ? "yes" : "no",
                                  m.dim(0), m.dim(1))};
}

// 3. Cross-attention invariants on random instances.
Outcome attention_invariants()
{
    RngStream rng(3, "acceptance-attention");
    double worst_sum = 0.0, worst_hull = 0.0, worst_identity = 0.0;
    bool negative = false;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t batch = 1 + rng.below(3), snps = 1 + rng.below(6), steps = 1 + rng.below(40);
        const std::size_t d = 2 * (1 + rng.below(4)), dw = d;
        const Tensor q = random_tensor({batch, snps, d}, rng, -2, 2);
        const Tensor y = random_tensor({batch, steps, dw}, rng, -2, 2);
        const Tensor wk = random_tensor({d, dw}, rng, -2, 2);
        // Identity output projection exposes the pre-dense context.
        Tensor wo({dw, dw});
        for (std::size_t i = 0; i < dw; ++i)
            wo.at(i, i) = 1.0;
        ComputationRecord rec;
        const AttentionOutput out = cross_attention(rec, rec.constant(q), rec.constant(y), {}, rec.constant(wk),
                                                    rec.constant(wo), rec.constant(Tensor({dw})), true);
        const Tensor& alpha = rec.value(out.weights);
        const Tensor& ctx = rec.value(out.context);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t s = 0; s < snps; ++s) {
                double total = 0.0;
                for (std::size_t t = 0; t < steps; ++t) {
                    negative |= alpha.at(b, s, t) < 0.0;
                    total += alpha.at(b, s, t);
                }
                worst_sum = std::max(worst_sum, std::abs(total - 1.0));
                for (std::size_t j = 0; j < dw; ++j) {
                    double lo = y.at(b, 0, j), hi = lo;
                    for (std::size_t t = 1; t < steps; ++t) {
                        lo = std::min(lo, y.at(b, t, j));
                        hi = std::max(hi, y.at(b, t, j));
                    }
                    const double v = ctx[(b * snps + s) * dw + j];
                    worst_hull = std::max({worst_hull, lo - v, v - hi});
                    if (steps == 1)
                        worst_identity = std::max(worst_identity, std::abs(v - y.at(b, 0, j)));
                }
            }
    }
    const bool ok = !negative && worst_sum <= 1e-9 && worst_hull <= 1e-12 && worst_identity == 0.0;
    return {ok, fmt("1000 instances, max |sum-1| %.1e, hull violation %.1e, T'=1 deviation %.1e", worst_sum,
                    std::max(worst_hull, 0.0), worst_identity)};
}

// 4. Permuting SNPs together with their descriptors through the full pipeline.
Outcome permutation_invariance()
{
    const Dataset ds = small_dataset(4);
    std::vector<std::size_t> all(ds.observations.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::string> ids;
    for (const auto& s : ds.genotypes.snps)
        ids.push_back(s.id);
    const Preprocessor prep = Preprocessor::fit(ds, all, ids, "all");
    ModelConfig c = small_crossval_config().model;
    c.snp_count = ids.size();
    const ModelParams params = init_params(c, RngStream(4, "init"));
    const auto rows = prep.rows(ds, all);
    const auto base = predict_rows(params, prep.encode(ds, c), rows);

    RngStream rng(4, "permutation");
    std::size_t identical = 0;
    for (int trial = 0; trial < 5; ++trial) {
        Preprocessor permuted = prep;
        rng.shuffle(std::span<std::string>(permuted.snp_ids));
        if (predict_rows(params, permuted.encode(ds, c), rows) == base)
            ++identical;
    }
    return {identical == 5, fmt("%zu of 5 permutations bitwise identical over %zu predictions", identical,
                                base.size())};
}

// 5. MI estimator against analytic values at n = 1e5.
Outcome mi_oracle()
{
    const std::size_t n = 100000;
    RngStream rng(5, "acceptance-mi");
    std::vector<std::string> parts;
    double worst = 0.0;

    auto from_joint = [&](const std::vector<std::vector<double>>& p) {
        std::vector<int> x;
        std::vector<double> y;
        for (std::size_t a = 0; a < p.size(); ++a)
            for (std::size_t b = 0; b < p[a].size(); ++b)
                for (std::size_t i = 0; i < static_cast<std::size_t>(std::llround(p[a][b] * n)); ++i) {
                    x.push_back(static_cast<int>(a));
                    y.push_back(static_cast<double>(b));
                }
        std::vector<std::size_t> order(x.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(order));
        std::vector<int> xs;
        std::vector<double> ys;
        for (std::size_t i : order) {
            xs.push_back(x[i]);
            ys.push_back(y[i]);
        }
        double analytic = 0.0;
        std::vector<double> px(p.size(), 0.0), py(p[0].size(), 0.0);
        for (std::size_t a = 0; a < p.size(); ++a)
            for (std::size_t b = 0; b < p[a].size(); ++b) {
                px[a] += p[a][b];
                py[b] += p[a][b];
            }
        for (std::size_t a = 0; a < p.size(); ++a)
            for (std::size_t b = 0; b < p[a].size(); ++b)
                if (p[a][b] > 0)
                    analytic += p[a][b] * std::log(p[a][b] / (px[a] * py[b]));
        return std::make_pair(mutual_information(xs, ys, py.size()), analytic);
    };

    {
        const auto [est, exact] = from_joint({{0.5, 0.0}, {0.0, 0.5}});
        worst = std::max(worst, std::abs(est - exact));
        parts.push_back(fmt("ln2 case %.6f vs %.6f", est, exact));
    }
    {
        std::vector<int> x;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            x.push_back(static_cast<int>(rng.below(3)));
            y.push_back(static_cast<double>(rng.below(4)));
        }
        const double est = mutual_information(x, y, 4);
        worst = std::max(worst, std::abs(est));
        parts.push_back(fmt("independent %.6f vs 0", est));
    }
    {
        const auto [est, exact] = from_joint({{0.20, 0.05, 0.05}, {0.05, 0.20, 0.05}, {0.10, 0.10, 0.20}});
        worst = std::max(worst, std::abs(est - exact));
        parts.push_back(fmt("3x3 joint %.6f vs %.6f", est, exact));
    }
    return {worst <= 1e-3, parts[0] + "; " + parts[1] + "; " + parts[2]};
}

// 6. GBDT sanity.
Outcome gbdt_sanity()
{
    RngStream rng(6, "acceptance-gbdt");
    Tensor x({1000, 1});
    std::vector<double> y;
    for (std::size_t i = 0; i < 1000; ++i) {
        x[i] = rng.uniform(-3, 3);
        y.push_back(std::sin(x[i]) + 0.5 * x[i]);
    }
    const GbdtModel m = fit_gbdt(x, y);
    const auto pred = m.predict(x);
    double mean = 0, ss_tot = 0, ss_res = 0;
    for (double v : y)
        mean += v / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_tot += (y[i] - mean) * (y[i] - mean);
        ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
    }
    const double r2 = 1.0 - ss_res / ss_tot;
    bool monotone = true;
    for (std::size_t t = 1; t < m.training_mse.size(); ++t)
        monotone &= m.training_mse[t] <= m.training_mse[t - 1];

    Tensor xs({600, 12});
    std::vector<double> ys;
    for (std::size_t i = 0; i < 600; ++i) {
        for (std::size_t j = 0; j < 12; ++j)
            xs.at(i, j) = static_cast<double>(rng.below(3));
        ys.push_back(2.0 * xs.at(i, 7) + 0.3 * rng.normal());
    }
    const GbdtModel planted = fit_gbdt(xs, ys);
    const auto top = std::max_element(planted.gain.begin(), planted.gain.end()) - planted.gain.begin();
    const bool first = planted.features[static_cast<std::size_t>(top)] == 7;
    return {r2 >= 0.99 && monotone && first,
            fmt("R2 %.5f, loss monotone: %s, planted feature ranked first: %s", r2, monotone ? "yes" : "no",
                first ? "yes" : "no")};
}

/// Dosage of the non-reference allele (0/1/2) per hybrid for the given SNP ids.
Tensor causal_dosages(const GenotypeTable& g, const std::vector<std::string>& ids)
{
    Tensor x({g.hybrid_count(), ids.size() + 1});
    for (std::size_t h = 0; h < g.hybrid_count(); ++h) {
        x.at(h, 0) = 1.0;
        for (std::size_t j = 0; j < ids.size(); ++j) {
            const std::size_t s = g.snp_index(ids[j]);
            x.at(h, j + 1) = snp_dosage(g.call(h, s), g.snps[s].reference_base());
        }
    }
    return x;
}

// 7. Selection recovery of planted causal SNPs.
Outcome selection_recovery()
{
    const auto start = Clock::now();
    double recall_sum = 0.0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthConfig sc;
        sc.hybrids = 1000;
        sc.snps = 2000;
        sc.causal = 20;
        sc.interactions = 0;
        sc.environments = 4;
        sc.gamma_scale = 0.0;
        sc.seed = seed;
        // Genetic variance of the hybrid means from the noise-free draw (genotypes do not depend on sigma).
        sc.sigma = 0.0;
        const SynthData clean = generate(sc);
        std::vector<std::string> causal;
        for (const auto& c : clean.truth.causal)
            causal.push_back(c.snp_id);
        std::vector<std::size_t> all(clean.observations.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        auto hybrid_means = [&](const SynthData& d) {
            const Dataset ds = assemble_dataset(d.genotypes, d.weather, d.soil, d.management, d.observations);
            std::vector<std::size_t> rows;
            std::vector<double> means;
            hybrid_mean_yields(ds, all, rows, means);
            return means;
        };
        const std::vector<double> g = hybrid_means(clean);
        const double var_g = summarize(g).stddev * summarize(g).stddev;
        // R2 = var_g / (var_g + sigma^2 / E) = 0.8
        sc.sigma = std::sqrt(static_cast<double>(sc.environments) * var_g * (1.0 / 0.8 - 1.0));
        const SynthData noisy = generate(sc);
        const std::vector<double> y = hybrid_means(noisy);

        const Tensor x = causal_dosages(noisy.genotypes, causal);
        const auto fit = fitted(x, least_squares(x, y));
        const double r2 = 1.0 - mean_squared_difference(fit, y) /
                                    (summarize(y).stddev * summarize(y).stddev * (y.size() - 1.0) / y.size());

        std::vector<std::size_t> rows(noisy.genotypes.hybrid_count());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        SelectionConfig cfg;
        cfg.rfe_target = 500;
        cfg.final_count = 100;
        const SelectionReport report = select_snps(noisy.genotypes, rows, y, cfg);
        const auto selected = report.selected_ids();
        const std::set<std::string> chosen(selected.begin(), selected.end());
        std::size_t hits = 0;
        for (const auto& id : causal)
            hits += chosen.count(id);
        const double recall = static_cast<double>(hits) / static_cast<double>(causal.size());
        recall_sum += recall;
        per_seed += fmt(" seed%llu R2=%.3f recall=%.2f", static_cast<unsigned long long>(seed), r2, recall);
    }
    const double mean = recall_sum / 5.0;
    return {mean >= 0.8, fmt("mean recall %.3f over 5 seeds,", mean) + per_seed + fmt(", %.0f s", seconds_since(start))};
}

// 8. G*E mechanism: full beats no_ge with planted G*E; near-equal without.
struct GxeRun {
    double full = 0.0, no_ge = 0.0;
};

GxeRun gxe_runs(std::size_t interactions, std::size_t seeds)
{
    GxeRun out;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
        SynthConfig sc;
        sc.hybrids = 500;
        sc.environments = 20;
        sc.snps = 100;
        sc.causal = 10;
        sc.interactions = interactions;
        sc.beta_scale = 0.3;
        sc.gamma_scale = 0.0;
        sc.delta_scale = 3.0;
        sc.sigma = 0.3;
        sc.allele_freq_min = 0.05;
        sc.allele_freq_max = 0.2;
        sc.summary_days = 200;
        sc.seed = seed;
        SynthData d = generate(sc);
        const Dataset ds = assemble_dataset(std::move(d.genotypes), d.weather, std::move(d.soil),
                                            std::move(d.management), std::move(d.observations));
        const SplitPlan plan = make_split(ds.observations, SplitMode::environment, nullptr, 0, 10, seed);
        for (Variant v : {Variant::full, Variant::no_ge}) {
            CrossValConfig cv;
            cv.model.filters = 4;
            cv.model.weather_conv_channels = {8, 8};
            cv.model.fusion_hidden = {32, 8};
            cv.model.variant = v;
            cv.train.max_epochs = 15;
            cv.train.patience = 5;
            cv.train.adam.learning_rate = 3e-3;
            cv.rotations = {0};
            const double rmse = cross_validate(ds, plan, cv, seed).report.validation_rmse().mean;
            (v == Variant::full ? out.full : out.no_ge) += rmse / static_cast<double>(seeds);
        }
    }
    return out;
}

Outcome gxe_direction()
{
    const auto start = Clock::now();
    const GxeRun planted = gxe_runs(5, 5);
    const GxeRun none = gxe_runs(0, 5);
    const double secs = seconds_since(start);
    const double gap = std::abs(none.full - none.no_ge) / std::min(none.full, none.no_ge);
    const bool ok = planted.full < planted.no_ge && gap < 0.05 && secs < 1800.0;
    return {ok, fmt("planted G*E: full %.4f vs no_ge %.4f; I=0: full %.4f vs no_ge %.4f (gap %.1f%%); %.0f s",
                    planted.full, planted.no_ge, none.full, none.no_ge, 100.0 * gap, secs)};
}

// 9. Split protocol invariants at the published scale.
Outcome protocol_invariants()
{
    std::vector<std::string> problems;
    SynthConfig env_cfg;
    env_cfg.hybrids = 5;
    env_cfg.environments = 67;
    env_cfg.snps = 10;
    env_cfg.causal = 2;
    env_cfg.interactions = 1;
    SynthData d = generate(env_cfg);
    const Dataset envs = assemble_dataset(d.genotypes, d.weather, d.soil, d.management, d.observations);
    const SplitPlan plan = make_split(envs.observations, SplitMode::environment, nullptr, 0, 10, 9);
    std::multiset<std::string> units;
    for (const auto& g : plan.groups)
        units.insert(g.begin(), g.end());
    const bool partition = plan.folds() == 10 && units.size() == 67 &&
                           std::set<std::string>(units.begin(), units.end()).size() == 67;
    std::size_t env_overlaps = 0;
    for (std::size_t r = 0; r < 10; ++r) {
        const FoldMembers m = fold_members(envs, plan, r);
        std::set<std::string> tr, va, te;
        for (std::size_t i : m.train)
            tr.insert(envs.observations[i].env_id);
        for (std::size_t i : m.validation)
            va.insert(envs.observations[i].env_id);
        for (std::size_t i : m.test)
            te.insert(envs.observations[i].env_id);
        for (const auto& e : te)
            env_overlaps += tr.count(e) + va.count(e);
        for (const auto& e : va)
            env_overlaps += tr.count(e);
        if (m.train.size() + m.validation.size() + m.test.size() != envs.observations.size())
            ++env_overlaps;
    }

    SynthConfig hyb_cfg;
    hyb_cfg.hybrids = 2000;
    hyb_cfg.environments = 2;
    hyb_cfg.snps = 100;
    const SynthData h = generate(hyb_cfg);
    const Dataset hyb = assemble_dataset(h.genotypes, h.weather, h.soil, h.management, h.observations);
    const SplitPlan hplan = make_split(hyb.observations, SplitMode::hybrid, &hyb.genotypes, 100, 10, 9);
    std::set<std::string> clusters;
    for (const auto& [hybrid, cluster] : hplan.hybrid_cluster)
        clusters.insert(cluster);
    std::size_t cluster_overlaps = 0;
    for (std::size_t r = 0; r < 10; ++r) {
        const FoldMembers m = fold_members(hyb, hplan, r);
        std::set<std::string> tr, va, te;
        for (std::size_t i : m.train)
            tr.insert(hplan.hybrid_cluster.at(hyb.observations[i].hybrid_id));
        for (std::size_t i : m.validation)
            va.insert(hplan.hybrid_cluster.at(hyb.observations[i].hybrid_id));
        for (std::size_t i : m.test)
            te.insert(hplan.hybrid_cluster.at(hyb.observations[i].hybrid_id));
        for (const auto& c : te)
            cluster_overlaps += tr.count(c) + va.count(c);
        for (const auto& c : va)
            cluster_overlaps += tr.count(c);
    }
    const bool ok = partition && env_overlaps == 0 && hplan.hybrid_cluster.size() == 2000 &&
                    clusters.size() == 100 && cluster_overlaps == 0;
    return {ok, fmt("67 envs in 10 groups partitioned: %s, env overlaps %zu; 2000 hybrids in %zu clusters, "
                    "cluster overlaps %zu",
                    partition ? "yes" : "no", env_overlaps, clusters.size(), cluster_overlaps)};
}

// 10. Weather derivation fixed points and series shape.
Outcome weather_derivation()
{
    const double gdd = growing_degree_days((86.0 - 32.0) * 5.0 / 9.0, (50.0 - 32.0) * 5.0 / 9.0);
    const double capped = growing_degree_days((100.0 - 32.0) * 5.0 / 9.0, (40.0 - 32.0) * 5.0 / 9.0);
    const double dew = dew_point(611.2);
    SynthConfig c;
    c.hybrids = 2;
    c.environments = 30;
    c.snps = 2;
    c.causal = 1;
    c.interactions = 0;
    c.season_days = 215;
    c.season_jitter = 200;
    c.summary_days = 10;
    const SynthData d = generate(c);
    bool shapes = true;
    std::size_t min_days = 1000, max_days = 0;
    for (const auto& w : d.weather) {
        shapes &= window_and_pad(w).values.shape() == Shape{9, 43};
        min_days = std::min(min_days, w.days.size());
        max_days = std::max(max_days, w.days.size());
    }
    DailyWeather long_season = d.weather.front();
    while (long_season.days.size() < 400)
        long_season.days.push_back(long_season.days.back());
    shapes &= window_and_pad(long_season).values.shape() == Shape{9, 43};
    const bool ok = std::abs(gdd - 18.0) <= 1e-9 && std::abs(capped - 18.0) <= 1e-9 && std::abs(dew) <= 0.1 && shapes;
    return {ok, fmt("GDD(86F,50F) %.6f, GDD capped %.6f, dew point %.4f C, all series 9x43 (seasons %zu-%zu and 400 "
                    "days): %s",
                    gdd, capped, dew, min_days, max_days, shapes ? "yes" : "no")};
}

// 11. End-to-end determinism including fold-parallel execution.
Outcome determinism()
{
    const Dataset ds = small_dataset(11);
    const SplitPlan plan = make_split(ds.observations, SplitMode::environment, nullptr, 0, 10, 11);
    CrossValConfig cfg = small_crossval_config();
    const std::string a = cross_validate(ds, plan, cfg, 11).report.to_json().dump();
    const std::string b = cross_validate(ds, plan, cfg, 11).report.to_json().dump();
    cfg.threads = 4;
    const std::string p = cross_validate(ds, plan, cfg, 11).report.to_json().dump();
    const Dataset again = small_dataset(11);
    const SplitPlan plan2 = make_split(again.observations, SplitMode::environment, nullptr, 0, 10, 11);
    const std::string c = cross_validate(again, plan2, cfg, 11).report.to_json().dump();
    const bool ok = a == b && a == p && a == c;
    return {ok, fmt("10-fold report (%zu bytes): rerun %s, 4 threads %s, regenerated data %s", a.size(),
                    a == b ? "identical" : "differs", a == p ? "identical" : "differs",
                    a == c ? "identical" : "differs")};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient correctness", gradient_correctness},
        {"encoding exactness", encoding_exactness},
        {"attention invariants", attention_invariants},
        {"SNP-permutation invariance", permutation_invariance},
        {"MI oracle", mi_oracle},
        {"GBDT sanity", gbdt_sanity},
        {"selection recovery", selection_recovery},
        {"G*E mechanism check", gxe_direction},
        {"protocol invariants", protocol_invariants},
        {"weather derivation", weather_derivation},
        {"end-to-end determinism", determinism},
    };
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::stoul(argv[i]));
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1))
            continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
