#include "dqnsbl/design.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dqnsbl/kernels.hpp"

namespace dqnsbl {

namespace {

std::vector<int> all_columns(std::size_t n_total) {
    std::vector<int> cols(n_total);
    std::iota(cols.begin(), cols.end(), 0);
    return cols;
}

}  // namespace

DesignMatrix DesignMatrix::linear(const std::vector<SparseRow>* rows, int n_features) {
    DesignMatrix d;
    d.sparse_rows_ = rows;
    d.n_rows_ = rows->size();
    d.n_total_ = static_cast<std::size_t>(n_features) + 1;
    d.set_active(all_columns(d.n_total_));
    return d;
}

DesignMatrix DesignMatrix::dense(std::vector<double> data, std::size_t n_rows,
                                 std::size_t n_basis) {
    if (data.size() != n_rows * n_basis)
        throw std::invalid_argument("DesignMatrix::dense: data size mismatch");
    DesignMatrix d;
    d.n_rows_ = n_rows;
    d.n_total_ = n_basis + 1;
    // prepend the bias column in storage, stride = n_total
    d.dense_stride_ = d.n_total_;
    d.dense_.assign(n_rows * d.n_total_, 1.0);
    for (std::size_t i = 0; i < n_rows; ++i)
        std::copy(data.begin() + i * n_basis, data.begin() + (i + 1) * n_basis,
                  d.dense_.begin() + i * d.dense_stride_ + 1);
    d.set_active(all_columns(d.n_total_));
    return d;
}

void DesignMatrix::set_active(std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    active_ = std::move(keep);
    col_slot_.assign(n_total_, -1);
    for (std::size_t s = 0; s < active_.size(); ++s) col_slot_[active_[s]] = static_cast<int>(s);
}

void DesignMatrix::times(const double* w, double* z) const {
    if (sparse_rows_) {
        kernels::sparse_times(*sparse_rows_, col_slot_.data(), w, z);
    } else {
        kernels::dense_times(dense_.data(), n_rows_, dense_stride_, active_.data(),
                             active_.size(), w, z);
    }
}

void DesignMatrix::transpose_times(const double* r, double* g) const {
    if (sparse_rows_) {
        kernels::serial::sparse_transpose_times(*sparse_rows_, col_slot_.data(),
                                                active_.size(), r, g);
    } else {
        kernels::dense_transpose_times(dense_.data(), n_rows_, dense_stride_,
                                       active_.data(), active_.size(), r, g);
    }
}

void DesignMatrix::gather_row(std::size_t i, double* out) const {
    if (sparse_rows_) {
        std::fill(out, out + active_.size(), 0.0);
        if (col_slot_[0] >= 0) out[col_slot_[0]] = 1.0;
        for (const auto& e : (*sparse_rows_)[i]) {
            const int slot = col_slot_[e.index + 1];
            if (slot >= 0) out[slot] = e.value;
        }
    } else {
        const double* row = dense_.data() + i * dense_stride_;
        for (std::size_t s = 0; s < active_.size(); ++s) out[s] = row[active_[s]];
    }
}

}  // namespace dqnsbl
