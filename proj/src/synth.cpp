#include "dqnsbl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dqnsbl/kernels.hpp"

namespace dqnsbl::synth {

KnownSupport known_support(std::size_t n_rows, int n_features, int informative,
                           std::uint32_t seed, double signal) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    KnownSupport out;
    out.true_w.assign(n_features, 0.0);
    for (int f = 0; f < informative; ++f) {
        out.support.push_back(f);
        out.true_w[f] = (f % 2 == 0 ? signal : -signal);
    }

    out.data.n_features = n_features;
    for (std::size_t i = 0; i < n_rows; ++i) {
        SparseRow row;
        double z = 0.0;
        for (int f = 0; f < n_features; ++f) {
            const double v = gauss(rng);
            row.push_back({f, v});
            z += v * out.true_w[f];
        }
        out.data.rows.push_back(std::move(row));
        out.data.labels.push_back(unif(rng) < kernels::sigmoid(z) ? 1.0 : 0.0);
    }
    return out;
}

KnownSupport sparse_high_dim(std::size_t n_rows, int n_features, int informative,
                             int nnz_per_row, std::uint32_t seed, double signal) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> noise_feat(informative, n_features - 1);

    KnownSupport out;
    out.true_w.assign(n_features, 0.0);
    for (int f = 0; f < informative; ++f) {
        out.support.push_back(f);
        out.true_w[f] = (f % 2 == 0 ? signal : -signal);
    }

    out.data.n_features = n_features;
    for (std::size_t i = 0; i < n_rows; ++i) {
        SparseRow row;
        double z = 0.0;
        // informative block always present
        for (int f = 0; f < informative; ++f) {
            const double v = gauss(rng);
            row.push_back({f, v});
            z += v * out.true_w[f];
        }
        std::vector<int> feats;
        for (int j = 0; j < nnz_per_row; ++j) feats.push_back(noise_feat(rng));
        std::sort(feats.begin(), feats.end());
        feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
        for (int f : feats) row.push_back({f, gauss(rng)});
        out.data.rows.push_back(std::move(row));
        out.data.labels.push_back(unif(rng) < kernels::sigmoid(z) ? 1.0 : 0.0);
    }
    return out;
}

SparseDataset clusters(std::size_t rows_per_class, int n_classes, int n_features,
                       double separation, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SparseDataset ds;
    ds.n_features = n_features;
    std::vector<std::vector<double>> centers(n_classes, std::vector<double>(n_features));
    for (auto& c : centers)
        for (auto& v : c) v = separation * gauss(rng);
    for (int cls = 0; cls < n_classes; ++cls) {
        for (std::size_t i = 0; i < rows_per_class; ++i) {
            SparseRow row;
            for (int f = 0; f < n_features; ++f)
                row.push_back({f, centers[cls][f] + gauss(rng)});
            ds.rows.push_back(std::move(row));
            ds.labels.push_back(cls + 1);
        }
    }
    return ds;
}

}  // namespace dqnsbl::synth
