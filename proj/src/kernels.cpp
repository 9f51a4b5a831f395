#include "dqnsbl/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dqnsbl::kernels {

double sigmoid(double z) {
    double y;
    if (z >= 0.0) {
        y = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        y = e / (1.0 + e);
    }
    return std::clamp(y, 1e-12, 1.0 - 1e-12);
}

namespace serial {

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void dense_times(const double* x, std::size_t n_rows, std::size_t stride,
                 const int* cols, std::size_t m, const double* w, double* z) {
    for (std::size_t i = 0; i < n_rows; ++i) {
        const double* row = x + i * stride;
        double acc = 0.0;
        for (std::size_t s = 0; s < m; ++s) acc += row[cols[s]] * w[s];
        z[i] = acc;
    }
}

void dense_transpose_times(const double* x, std::size_t n_rows, std::size_t stride,
                           const int* cols, std::size_t m, const double* r, double* g) {
    std::fill(g, g + m, 0.0);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const double* row = x + i * stride;
        const double ri = r[i];
        for (std::size_t s = 0; s < m; ++s) g[s] += row[cols[s]] * ri;
    }
}

void sparse_times(const std::vector<SparseRow>& rows, const int* col_slot,
                  const double* w, double* z) {
    const double bias_w = col_slot[0] >= 0 ? w[col_slot[0]] : 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double acc = bias_w;
        for (const auto& e : rows[i]) {
            const int slot = col_slot[e.index + 1];
            if (slot >= 0) acc += w[slot] * e.value;
        }
        z[i] = acc;
    }
}

void sparse_transpose_times(const std::vector<SparseRow>& rows, const int* col_slot,
                            std::size_t m, const double* r, double* g) {
    std::fill(g, g + m, 0.0);
    const int bias_slot = col_slot[0];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double ri = r[i];
        if (bias_slot >= 0) g[bias_slot] += ri;
        for (const auto& e : rows[i]) {
            const int slot = col_slot[e.index + 1];
            if (slot >= 0) g[slot] += e.value * ri;
        }
    }
}

void sigmoid_rows(const double* z, std::size_t n, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = sigmoid(z[i]);
}

}  // namespace serial

namespace {

struct Block {
    std::size_t begin, end;
};

// Fixed decomposition: at most kReduceBlocks equal chunks regardless of
// the thread count, so the combine order never changes.
inline std::size_t block_bounds(std::size_t n, Block* blocks) {
    const std::size_t nb = std::min<std::size_t>(kReduceBlocks, std::max<std::size_t>(n, 1));
    for (std::size_t b = 0; b < nb; ++b) {
        blocks[b].begin = n * b / nb;
        blocks[b].end = n * (b + 1) / nb;
    }
    return nb;
}

}  // namespace

double sum(const double* x, std::size_t n) {
    Block blocks[kReduceBlocks];
    const std::size_t nb = block_bounds(n, blocks);
    double partial[kReduceBlocks];
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b)
        partial[b] = serial::sum(x + blocks[b].begin, blocks[b].end - blocks[b].begin);
    return serial::sum(partial, nb);
}

void dense_times(const double* x, std::size_t n_rows, std::size_t stride,
                 const int* cols, std::size_t m, const double* w, double* z) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_rows; ++i) {
        const double* row = x + i * stride;
        double acc = 0.0;
        for (std::size_t s = 0; s < m; ++s) acc += row[cols[s]] * w[s];
        z[i] = acc;
    }
}

void dense_transpose_times(const double* x, std::size_t n_rows, std::size_t stride,
                           const int* cols, std::size_t m, const double* r, double* g) {
    Block blocks[kReduceBlocks];
    const std::size_t nb = block_bounds(n_rows, blocks);
    std::vector<double> partial(nb * m, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nb; ++b) {
        double* gb = partial.data() + b * m;
        for (std::size_t i = blocks[b].begin; i < blocks[b].end; ++i) {
            const double* row = x + i * stride;
            const double ri = r[i];
            for (std::size_t s = 0; s < m; ++s) gb[s] += row[cols[s]] * ri;
        }
    }
    std::fill(g, g + m, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const double* gb = partial.data() + b * m;
        for (std::size_t s = 0; s < m; ++s) g[s] += gb[s];
    }
}

void sparse_times(const std::vector<SparseRow>& rows, const int* col_slot,
                  const double* w, double* z) {
    const double bias_w = col_slot[0] >= 0 ? w[col_slot[0]] : 0.0;
    const std::size_t n = rows.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        double acc = bias_w;
        for (const auto& e : rows[i]) {
            const int slot = col_slot[e.index + 1];
            if (slot >= 0) acc += w[slot] * e.value;
        }
        z[i] = acc;
    }
}

void sigmoid_rows(const double* z, std::size_t n, double* y) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) y[i] = sigmoid(z[i]);
}

}  // namespace dqnsbl::kernels
