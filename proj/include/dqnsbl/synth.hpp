#pragma once

#include <cstdint>
#include <vector>

#include "dqnsbl/dataset.hpp"

namespace dqnsbl::synth {

// Logistic data with a known sparse support: the first `informative`
// features carry alternating +/- signal weights, the rest are noise.
struct KnownSupport {
    SparseDataset data;
    std::vector<int> support;       // informative feature ids (0-based)
    std::vector<double> true_w;
};

KnownSupport known_support(std::size_t n_rows, int n_features, int informative,
                           std::uint32_t seed, double signal = 3.0);

// High-dimensional sparse variant: each row stores `nnz_per_row` random
// features; labels follow the informative block.
KnownSupport sparse_high_dim(std::size_t n_rows, int n_features, int informative,
                             int nnz_per_row, std::uint32_t seed, double signal = 4.0);

// Well-separated Gaussian clusters, one per class.
SparseDataset clusters(std::size_t rows_per_class, int n_classes, int n_features,
                       double separation, std::uint32_t seed);

}  // namespace dqnsbl::synth
