#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "dqnsbl/dataset.hpp"

namespace dqnsbl {

// N x (M+1) basis matrix with the bias as column 0 (constant 1). Columns
// may be pruned; products run over the active set only. Two storage
// modes: `linear` aliases the dataset's sparse rows (no copy), dense mode
// owns a row-major block (kernel / random-layer maps).
class DesignMatrix {
public:
    // Linear mode: column f+1 carries feature f of `rows`. `rows` must
    // outlive the design matrix.
    static DesignMatrix linear(const std::vector<SparseRow>* rows, int n_features);

    // Dense mode: `data` is n_rows x n_basis, column j+1 of the design is
    // basis j; the bias column is implicit.
    static DesignMatrix dense(std::vector<double> data, std::size_t n_rows,
                              std::size_t n_basis);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_total_columns() const { return n_total_; }
    std::size_t n_active() const { return active_.size(); }
    const std::vector<int>& active() const { return active_; }
    bool is_sparse() const { return sparse_rows_ != nullptr; }

    // `keep` lists original column ids (ascending, may include 0 = bias).
    void set_active(std::vector<int> keep);

    // z = X_a w, |w| = n_active, |z| = n_rows
    void times(const double* w, double* z) const;
    // g = X_aᵀ r
    void transpose_times(const double* r, double* g) const;
    // Dense copy of one row over active slots (oracle/prediction use).
    void gather_row(std::size_t i, double* out) const;

private:
    const std::vector<SparseRow>* sparse_rows_ = nullptr;
    std::vector<double> dense_;
    std::size_t dense_stride_ = 0;
    std::size_t n_rows_ = 0;
    std::size_t n_total_ = 0;          // basis count + 1 (bias)
    std::vector<int> active_;          // original column ids
    std::vector<int> col_slot_;        // column id -> active slot, -1 if pruned
};

}  // namespace dqnsbl
