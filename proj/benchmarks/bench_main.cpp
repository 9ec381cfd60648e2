#include "deepg2p/gbdt.hpp"
#include "deepg2p/kernels.hpp"
#include "deepg2p/model.hpp"
#include "deepg2p/mutual_info.hpp"
#include "deepg2p/ops.hpp"
#include "deepg2p/record.hpp"
#include "deepg2p/rng.hpp"

#include <benchmark/benchmark.h>

using namespace deepg2p;

namespace {

Tensor random_tensor(Shape shape, RngStream& rng)
{
    Tensor t(std::move(shape));
    for (double& v : t.data())
        v = rng.uniform(-1.0, 1.0);
    return t;
}

ModelInputs model_inputs(const ModelConfig& c, std::size_t batch, RngStream& rng)
{
    ModelInputs in;
    in.snps = Tensor({batch, c.snp_count, 4, c.context_width()});
    for (std::size_t i = 0; i < in.snps.size(); i += 4 * c.context_width())
        for (std::size_t j = 0; j < c.context_width(); ++j)
            in.snps[i + rng.below(4) * c.context_width() + j] = 1.0;
    in.positional = random_tensor({c.snp_count, c.snp_dim()}, rng);
    const std::size_t envs = 16;
    in.weather = random_tensor({envs, c.weather_channels, c.weather_length}, rng);
    for (std::size_t b = 0; b < batch; ++b)
        in.weather_rows.push_back(b % envs);
    in.soil = random_tensor({batch, c.soil_features}, rng);
    in.management = random_tensor({batch, c.management_features}, rng);
    return in;
}

void BM_Conv1d(benchmark::State& state)
{
    RngStream rng(1, "bench");
    const std::size_t batch = 64, channels = 9, length = 43, out = static_cast<std::size_t>(state.range(0));
    const Tensor x = random_tensor({batch, channels, length}, rng);
    const Tensor w = random_tensor({out, channels, 3}, rng);
    const Tensor b = random_tensor({out}, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(conv1d_valid(x, w, b));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}
BENCHMARK(BM_Conv1d)->Arg(32)->Arg(64);

void BM_ModelStep(benchmark::State& state)
{
    RngStream rng(2, "bench");
    ModelConfig c;
    c.variant = static_cast<Variant>(state.range(0));
    ModelParams params = init_params(c, RngStream(2, "init"));
    const ModelInputs in = model_inputs(c, 64, rng);
    const Tensor target = random_tensor({64}, rng);
    for (auto _ : state) {
        ComputationRecord rec(&params.store);
        const ForwardOutput out = model_forward(rec, params, in, Mode::inference);
        rec.backward(ops::mse_loss(rec, out.prediction, rec.constant(target)));
    }
    state.SetLabel(std::string(variant_name(c.variant)));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 64));
}
BENCHMARK(BM_ModelStep)
    ->Arg(static_cast<int>(Variant::full))
    ->Arg(static_cast<int>(Variant::no_ge))
    ->Arg(static_cast<int>(Variant::no_g))
    ->Unit(benchmark::kMillisecond);

void BM_GbdtFit(benchmark::State& state)
{
    RngStream rng(3, "bench");
    const std::size_t n = 500, p = static_cast<std::size_t>(state.range(0));
    Tensor x({n, p});
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j)
            x.at(i, j) = static_cast<double>(rng.below(3));
        y[i] = x.at(i, 0) - x.at(i, 1) + rng.normal();
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_gbdt(x, y));
}
BENCHMARK(BM_GbdtFit)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MutualInformation(benchmark::State& state)
{
    RngStream rng(4, "bench");
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<int> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<int>(rng.below(3));
        y[i] = rng.normal() + x[i];
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(mutual_information(x, y));
}
BENCHMARK(BM_MutualInformation)->Arg(1000)->Arg(100000);

} // namespace

BENCHMARK_MAIN();
