#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>

#include "cvqkd/protocol.hpp"
#include "cvqkd/rates.hpp"

using namespace cvqkd;

namespace {

void BM_normal_sample(benchmark::State& state) {
    Rng rng(1);
    double acc = 0.0;
    for (auto _ : state) acc += normal_sample(rng, 0.0, 1.0);
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_normal_sample);

void BM_coherent_fock(benchmark::State& state) {
    const std::complex<double> alpha(1.3, -0.8);
    for (auto _ : state) {
        auto v = coherent_fock(alpha, 40);
        benchmark::DoNotOptimize(v.amps.data());
    }
}
BENCHMARK(BM_coherent_fock);

void BM_squeezed_fock(benchmark::State& state) {
    for (auto _ : state) {
        auto v = squeezed_fock(0.4, 0.9, 1.0, 0.25, 40);
        benchmark::DoNotOptimize(v.amps.data());
    }
}
BENCHMARK(BM_squeezed_fock);

void BM_css_rate(benchmark::State& state) {
    double acc = 0.0;
    for (auto _ : state) acc += css_rate(0.0311, 0.00533);
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_css_rate);

void BM_slice_error_rates(benchmark::State& state) {
    auto smap = build_equiprobable_slices(std::sqrt(15.5), 2, SliceLabeling::binary);
    const double t = loss_db_to_transmittance(0.4);
    for (auto _ : state) {
        auto e = slice_error_rates(t, 31.0, smap, DecodeRule::nearest_boundary);
        benchmark::DoNotOptimize(e.data());
    }
}
BENCHMARK(BM_slice_error_rates)->Unit(benchmark::kMillisecond);

void BM_probe_design(benchmark::State& state) {
    const int cutoff = static_cast<int>(state.range(0));
    Rng rng(7);
    for (auto _ : state) {
        auto probes = design_probes(cutoff, 0.05, 100.0, rng);
        benchmark::DoNotOptimize(probes.alphas.data());
    }
}
BENCHMARK(BM_probe_design)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_effect_inversion(benchmark::State& state) {
    const int cutoff = static_cast<int>(state.range(0));
    Rng rng(7);
    auto probes = design_probes(cutoff, 0.05, 100.0, rng);
    auto gamma = build_gamma(probes);
    Eigen::VectorXd f(probes.probe_count());
    for (int k = 0; k < probes.probe_count(); ++k) f(k) = 0.1 + 0.3 * uniform_unit(rng);
    for (auto _ : state) {
        auto est = invert_for_effect(f, gamma);
        benchmark::DoNotOptimize(est.matrix.data());
    }
}
BENCHMARK(BM_effect_inversion)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_syndrome_decode(benchmark::State& state) {
    auto h = hamming74_check();
    BitVec v{1, 0, 1, 1, 0, 0, 1};
    BitVec xi = syndrome(h, BitVec{1, 0, 1, 1, 0, 0, 0});
    for (auto _ : state) {
        auto d = syndrome_decode(v, xi, h);
        benchmark::DoNotOptimize(d.data());
    }
}
BENCHMARK(BM_syndrome_decode);

void BM_privacy_amplify(benchmark::State& state) {
    auto pair = hamming74_pair();
    BitVec k{1, 0, 1, 1, 0, 0, 1};
    for (auto _ : state) {
        auto out = privacy_amplify(pair.h2, k);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_privacy_amplify);

void BM_run_session_small(benchmark::State& state) {
    SessionConfig cfg;
    cfg.n_key = 70;
    cfg.n_bitcheck = 50;
    cfg.probe_copies = 2000;
    cfg.cutoff = 1;
    cfg.test_centers = {0.0, 0.6, -0.6};
    std::uint64_t seed = 1;
    for (auto _ : state) {
        cfg.seed = seed++;
        auto rep = run_session(cfg);
        benchmark::DoNotOptimize(rep.verdict);
    }
}
BENCHMARK(BM_run_session_small)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
