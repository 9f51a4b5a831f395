// Compares the OpenMP kernels against the serial reference implementation.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dqnsbl/kernels.hpp"

using namespace dqnsbl;

namespace {

struct DenseFixture {
    std::size_t n, m;
    std::vector<double> x;
    std::vector<int> cols;
    std::vector<double> w;
    std::vector<double> r;
    std::vector<double> out;

    DenseFixture(std::size_t n_, std::size_t m_) : n(n_), m(m_) {
        std::mt19937 rng(7);
        std::normal_distribution<double> g(0, 1);
        x.resize(n * m);
        for (auto& v : x) v = g(rng);
        for (std::size_t c = 0; c < m; ++c) cols.push_back(static_cast<int>(c));
        w.resize(m);
        for (auto& v : w) v = g(rng);
        r.resize(n);
        for (auto& v : r) v = g(rng);
        out.resize(std::max(n, m));
    }
};

std::vector<SparseRow> make_sparse(std::size_t n, int m, int nnz) {
    std::mt19937 rng(9);
    std::normal_distribution<double> g(0, 1);
    std::vector<SparseRow> rows(n);
    for (auto& row : rows) {
        for (int f = 0; f < m; ++f)
            if (rng() % (m / nnz) == 0) row.push_back({f, g(rng)});
    }
    return rows;
}

void bm_dense_times_serial(benchmark::State& state) {
    DenseFixture f(static_cast<std::size_t>(state.range(0)), 256);
    for (auto _ : state) {
        kernels::serial::dense_times(f.x.data(), f.n, f.m, f.cols.data(), f.cols.size(),
                                     f.w.data(), f.out.data());
        benchmark::DoNotOptimize(f.out.data());
    }
}

void bm_dense_times_omp(benchmark::State& state) {
    DenseFixture f(static_cast<std::size_t>(state.range(0)), 256);
    for (auto _ : state) {
        kernels::dense_times(f.x.data(), f.n, f.m, f.cols.data(), f.cols.size(), f.w.data(),
                             f.out.data());
        benchmark::DoNotOptimize(f.out.data());
    }
}

void bm_dense_transpose_times_serial(benchmark::State& state) {
    DenseFixture f(static_cast<std::size_t>(state.range(0)), 256);
    for (auto _ : state) {
        kernels::serial::dense_transpose_times(f.x.data(), f.n, f.m, f.cols.data(),
                                               f.cols.size(), f.r.data(), f.out.data());
        benchmark::DoNotOptimize(f.out.data());
    }
}

void bm_dense_transpose_times_omp(benchmark::State& state) {
    DenseFixture f(static_cast<std::size_t>(state.range(0)), 256);
    for (auto _ : state) {
        kernels::dense_transpose_times(f.x.data(), f.n, f.m, f.cols.data(), f.cols.size(),
                                       f.r.data(), f.out.data());
        benchmark::DoNotOptimize(f.out.data());
    }
}

void bm_sum_serial(benchmark::State& state) {
    DenseFixture f(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::sum(f.r.data(), f.n));
}

void bm_sum_omp(benchmark::State& state) {
    DenseFixture f(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::sum(f.r.data(), f.n));
}

void bm_sparse_times_serial(benchmark::State& state) {
    auto rows = make_sparse(static_cast<std::size_t>(state.range(0)), 1000, 50);
    std::vector<int> slot(1001);
    for (int c = 0; c <= 1000; ++c) slot[c] = c;
    std::vector<double> w(1001, 0.5), z(rows.size());
    for (auto _ : state) {
        kernels::serial::sparse_times(rows, slot.data(), w.data(), z.data());
        benchmark::DoNotOptimize(z.data());
    }
}

void bm_sparse_times_omp(benchmark::State& state) {
    auto rows = make_sparse(static_cast<std::size_t>(state.range(0)), 1000, 50);
    std::vector<int> slot(1001);
    for (int c = 0; c <= 1000; ++c) slot[c] = c;
    std::vector<double> w(1001, 0.5), z(rows.size());
    for (auto _ : state) {
        kernels::sparse_times(rows, slot.data(), w.data(), z.data());
        benchmark::DoNotOptimize(z.data());
    }
}

}  // namespace

BENCHMARK(bm_dense_times_serial)->Arg(1 << 10)->Arg(1 << 14);
BENCHMARK(bm_dense_times_omp)->Arg(1 << 10)->Arg(1 << 14);
BENCHMARK(bm_dense_transpose_times_serial)->Arg(1 << 10)->Arg(1 << 14);
BENCHMARK(bm_dense_transpose_times_omp)->Arg(1 << 10)->Arg(1 << 14);
BENCHMARK(bm_sum_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_sum_omp)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_sparse_times_serial)->Arg(1 << 12)->Arg(1 << 15);
BENCHMARK(bm_sparse_times_omp)->Arg(1 << 12)->Arg(1 << 15);

BENCHMARK_MAIN();
