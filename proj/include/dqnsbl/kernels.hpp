#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dqnsbl/dataset.hpp"

// Data-parallel inner loops. Every OpenMP kernel has a serial reference
// twin in kernels::serial with identical semantics; the parallel versions
// use a fixed block decomposition (independent of thread count) with a
// serial combine, so results are bitwise reproducible run to run.
namespace dqnsbl::kernels {

inline constexpr int kReduceBlocks = 64;

namespace serial {

double sum(const double* x, std::size_t n);

// z[i] = sum_s x[i*stride + cols[s]] * w[s]
void dense_times(const double* x, std::size_t n_rows, std::size_t stride,
                 const int* cols, std::size_t m, const double* w, double* z);

// g[s] = sum_i x[i*stride + cols[s]] * r[i]
void dense_transpose_times(const double* x, std::size_t n_rows, std::size_t stride,
                           const int* cols, std::size_t m, const double* r, double* g);

// Sparse rows, bias at slot col_slot[0]; feature f lives at column f+1.
// col_slot[c] is the active slot of column c, or -1 when pruned.
void sparse_times(const std::vector<SparseRow>& rows, const int* col_slot,
                  const double* w, double* z);

void sparse_transpose_times(const std::vector<SparseRow>& rows, const int* col_slot,
                            std::size_t m, const double* r, double* g);

void sigmoid_rows(const double* z, std::size_t n, double* y);

}  // namespace serial

double sum(const double* x, std::size_t n);

void dense_times(const double* x, std::size_t n_rows, std::size_t stride,
                 const int* cols, std::size_t m, const double* w, double* z);

void dense_transpose_times(const double* x, std::size_t n_rows, std::size_t stride,
                           const int* cols, std::size_t m, const double* r, double* g);

void sparse_times(const std::vector<SparseRow>& rows, const int* col_slot,
                  const double* w, double* z);

void sigmoid_rows(const double* z, std::size_t n, double* y);

// Sigmoid clamped to [1e-12, 1 - 1e-12]; overflow-safe for any finite z.
double sigmoid(double z);

// log(1 + e^u) without overflow or cancellation.
inline double softplus(double u) {
    return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

// -[t log y + (1-t) log(1-y)] with y the clamped sigmoid of z, evaluated
// in softplus form so large |z| does not lose precision to cancellation.
inline double bernoulli_nll(double z, double t) {
    static const double cap = -std::log(1e-12);
    return t * std::min(cap, softplus(-z)) + (1.0 - t) * std::min(cap, softplus(z));
}

}  // namespace dqnsbl::kernels
