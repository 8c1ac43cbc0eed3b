// Serial reference vs OpenMP kernel for each parallel hot path.
// Parallel variants take the thread count as the benchmark argument (0 = runtime default).

#include "sjl/data_io.hpp"
#include "sjl/embedding.hpp"
#include "sjl/oracle.hpp"
#include "sjl/parallel.hpp"
#include "sjl/row_bound.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <thread>

using namespace sjl;

namespace {

const BoundParams kParams = make_params(10000, 1000, 10, 0.1);
constexpr std::uint64_t kTrials = 200;

void set_threads(benchmark::State& state) {
    set_thread_count(static_cast<int>(state.range(0)));
    state.counters["threads"] = thread_count();
}

std::vector<double> log_space(double lo, double hi, int points) {
    std::vector<double> out;
    for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(hi / lo, i / double(points - 1)));
    return out;
}

Dataset synthetic(std::size_t rows, std::size_t dim) {
    Dataset data;
    CounterRng rng(3, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> row(dim, 0.0);
        for (auto& x : row)
            if (rng.below(4) == 0) x = rng.uniform();
        data.push_row(row);
    }
    return data;
}

void BM_mc_error_tail_serial(benchmark::State& state) {
    const auto x = worst_case_vector(kParams.n, kParams.v);
    for (auto _ : state) benchmark::DoNotOptimize(mc_error_tail_serial(kParams, x, 0.25, kTrials, 1));
    state.SetItemsProcessed(state.iterations() * kTrials);
}

void BM_mc_error_tail(benchmark::State& state) {
    set_threads(state);
    const auto x = worst_case_vector(kParams.n, kParams.v);
    for (auto _ : state) benchmark::DoNotOptimize(mc_error_tail(kParams, x, 0.25, kTrials, 1));
    state.SetItemsProcessed(state.iterations() * kTrials);
    set_thread_count(0);
}

void BM_mc_error_moment_serial(benchmark::State& state) {
    const auto x = worst_case_vector(kParams.n, kParams.v);
    for (auto _ : state) benchmark::DoNotOptimize(mc_error_moment_serial(kParams, x, 4, kTrials, 1));
    state.SetItemsProcessed(state.iterations() * kTrials);
}

void BM_mc_error_moment(benchmark::State& state) {
    set_threads(state);
    const auto x = worst_case_vector(kParams.n, kParams.v);
    for (auto _ : state) benchmark::DoNotOptimize(mc_error_moment(kParams, x, 4, kTrials, 1));
    state.SetItemsProcessed(state.iterations() * kTrials);
    set_thread_count(0);
}

struct Grid {
    std::vector<double> p = log_space(1e-3, 0.5, 20);
    std::vector<double> v = log_space(1e-2, 1.0, 20);
    std::vector<double> d;
    Grid() {
        for (int k = 2; k <= 32; k += 2) d.push_back(k);
    }
};

void BM_ratio_grid_serial(benchmark::State& state) {
    const Grid g;
    for (auto _ : state) benchmark::DoNotOptimize(ratio_grid_serial(10000, g.p, g.v, g.d));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.p.size() * g.v.size() * g.d.size()));
}

void BM_ratio_grid(benchmark::State& state) {
    set_threads(state);
    const Grid g;
    for (auto _ : state) benchmark::DoNotOptimize(ratio_grid(10000, g.p, g.v, g.d));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.p.size() * g.v.size() * g.d.size()));
    set_thread_count(0);
}

void BM_dispersion_profile_serial(benchmark::State& state) {
    const auto data = synthetic(400, 500);
    for (auto _ : state) benchmark::DoNotOptimize(dispersion_profile_serial(data, 250, 1));
    state.SetItemsProcessed(state.iterations() * 250 * 249 / 2);
}

void BM_dispersion_profile(benchmark::State& state) {
    set_threads(state);
    const auto data = synthetic(400, 500);
    for (auto _ : state) benchmark::DoNotOptimize(dispersion_profile(data, 250, 1));
    state.SetItemsProcessed(state.iterations() * 250 * 249 / 2);
    set_thread_count(0);
}

void BM_sample_embedding(benchmark::State& state) {
    set_threads(state);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(SparseEmbedding::sample(100000, 1000, 8, SamplingVariant::ColumnWithoutReplacement, ++seed));
    state.SetItemsProcessed(state.iterations() * 100000 * 8);
    set_thread_count(0);
}

void thread_args(benchmark::internal::Benchmark* b) {
    b->Arg(1);
    if (std::thread::hardware_concurrency() > 1) b->Arg(0);
}

}  // namespace

BENCHMARK(BM_mc_error_tail_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_error_tail)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_error_moment_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_error_moment)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ratio_grid_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ratio_grid)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dispersion_profile_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dispersion_profile)->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sample_embedding)->Apply(thread_args)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
