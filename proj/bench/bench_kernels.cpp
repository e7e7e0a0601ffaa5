// SPDX-License-Identifier: Apache-2.0
// Serial reference vs OpenMP kernels on desk-scale sizes.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ris/kernels.hpp"

using namespace ris;

namespace {

struct Problem {
    std::vector<Vec3> points;
    std::vector<Vec3> sources;
    std::vector<cplx> amp;
    std::vector<cplx> v;
    double k = kTwoPi * 6e9 / 299792458.0;
};

Problem make_problem(std::size_t n_points, int side) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.05, 1.45);
    Problem p;
    for (std::size_t j = 0; j < n_points; ++j) p.points.push_back({u(rng), u(rng), u(rng)});
    const double d = 0.0125;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) p.sources.push_back({0.0, 0.5 + c * d, 0.5 + r * d});
    for (std::size_t n = 0; n < p.sources.size(); ++n) p.amp.push_back(std::polar(1.0, u(rng)));
    for (std::size_t j = 0; j < n_points; ++j) p.v.push_back(std::polar(1.0, u(rng)));
    return p;
}

const Problem &desk() {
    static const Problem p = make_problem(2000, 24);
    return p;
}

void BM_radiate_serial(benchmark::State &state) {
    const auto &p = desk();
    std::vector<cplx> out(p.points.size());
    for (auto _ : state) {
        kernels::radiate_serial(p.points, p.sources, p.amp, p.k, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_radiate(benchmark::State &state) {
    const auto &p = desk();
    std::vector<cplx> out(p.points.size());
    for (auto _ : state) {
        kernels::radiate(p.points, p.sources, p.amp, p.k, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_radiate_adjoint_serial(benchmark::State &state) {
    const auto &p = desk();
    std::vector<cplx> out(p.sources.size());
    for (auto _ : state) {
        kernels::radiate_adjoint_serial(p.points, p.sources, p.v, p.k, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_radiate_adjoint(benchmark::State &state) {
    const auto &p = desk();
    std::vector<cplx> out(p.sources.size());
    for (auto _ : state) {
        kernels::radiate_adjoint(p.points, p.sources, p.v, p.k, out);
        benchmark::DoNotOptimize(out.data());
    }
}

const kernels::GreenOperator &cached_green() {
    static const kernels::GreenOperator g(desk().points, desk().sources, desk().k, std::size_t{1} << 30);
    return g;
}

void BM_green_apply_serial(benchmark::State &state) {
    const auto &g = cached_green();
    std::vector<cplx> out(g.rows());
    for (auto _ : state) {
        g.apply_serial(desk().amp, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_green_apply(benchmark::State &state) {
    const auto &g = cached_green();
    std::vector<cplx> out(g.rows());
    for (auto _ : state) {
        g.apply(desk().amp, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Serial>
void BM_correlation_fold(benchmark::State &state) {
    const auto &g = cached_green();
    const std::size_t N = g.cols();
    std::vector<double> diag(N);
    std::vector<double> dense(state.range(0) ? N * N : 0);
    for (auto _ : state) {
        if constexpr (Serial)
            kernels::correlation_fold_serial(g, desk().v, desk().amp, diag, dense);
        else
            kernels::correlation_fold(g, desk().v, desk().amp, diag, dense);
        benchmark::DoNotOptimize(diag.data());
    }
}

}  // namespace

BENCHMARK(BM_radiate_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_radiate)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_radiate_adjoint_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_radiate_adjoint)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_green_apply_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_green_apply)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_correlation_fold<true>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_correlation_fold<false>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
