#include <benchmark/benchmark.h>

#include <vector>

#include "skpca/checks.hpp"
#include "skpca/datagen.hpp"
#include "skpca/oja.hpp"
#include "skpca/spectral.hpp"

namespace {

using namespace skpca;

FeatureMapSpec spec_for(int kind, std::size_t d) {
    if (kind == 1) return FeatureMapSpec::poly2(d);
    if (kind == 2) return FeatureMapSpec::rff(d, 4 * d, 1.0, 1);
    return FeatureMapSpec::identity(d);
}

void BM_OjaStep(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(1));
    OjaConfig cfg;
    cfg.feature_map = FeatureMap(spec_for(static_cast<int>(state.range(0)), d));
    cfg.eta = 1e-4;
    const SpikedStream stream = make_spiked_stream({d, 256, 1.0, 0.1, 1.0, 1, 1});
    StreamState s = init_state(cfg.feature_map.feature_dim(), 1);
    std::size_t i = 0;
    for (auto _ : state) {
        s = oja_step(s, stream.samples[i++ % stream.samples.size()], cfg).state;
        benchmark::DoNotOptimize(s.log_norm);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_OjaStep)->ArgsProduct({{0, 1, 2}, {8, 32}});

void BM_Jacobi(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    const SpikedStream stream = make_spiked_stream({d, 4 * d, 1.0, 0.1, 1.0, 2, 2});
    const SpectralSummary s = summarize(stream.samples, FeatureMap(FeatureMapSpec::identity(d)));
    for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigendecomposition(s.second_moment));
}
BENCHMARK(BM_Jacobi)->RangeMultiplier(2)->Range(8, 128);

void BM_Summarize(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SpikedStream stream = make_spiked_stream({16, n, 1.0, 0.1, 1.0, 3, 3});
    const FeatureMap phi(FeatureMapSpec::identity(16));
    for (auto _ : state) benchmark::DoNotOptimize(summarize(stream.samples, phi));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Summarize)->Arg(500)->Arg(2000);

void BM_RunAllChecks(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const SpikedStream stream = make_spiked_stream({8, n, 1.0, 0.1, 1.0, 4, 4});
    const FeatureMap phi(FeatureMapSpec::identity(8));
    std::vector<DenseVector> features;
    for (const DenseVector& x : stream.samples) features.push_back(phi.apply(x));
    const SpectralSummary summary = summarize_features(features);
    OjaConfig cfg;
    cfg.feature_map = phi;
    cfg.eta = 1e-3;
    cfg.record_trajectory = cfg.record_snapshots = true;
    const Trajectory t =
        *run_stream(stream.samples, cfg, init_state_at(summary.top_vector), InitKind::at_v_star).trajectory;
    const AlphaBeta ab = compute_alpha_beta(summary, cfg.eta, summary.top_vector);
    CheckContext ctx;
    ctx.features = features;
    ctx.v_star = summary.top_vector;
    ctx.alpha = ab.alpha;
    ctx.beta = ab.beta;
    for (auto _ : state) benchmark::DoNotOptimize(run_all_checks(t, ctx));
}
BENCHMARK(BM_RunAllChecks)->Arg(64)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
