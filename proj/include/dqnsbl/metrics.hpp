#pragma once

#include <string>
#include <vector>

#include "dqnsbl/dataset.hpp"
#include "dqnsbl/model.hpp"

namespace dqnsbl {

double accuracy(const OvoEnsemble& ens, const SparseDataset& ds,
                const std::vector<std::size_t>* subset = nullptr);

struct MetricsRecord {
    std::string cell;                    // hyperparameter description
    std::vector<double> fold_accuracy;   // percentages
    double mean_accuracy = 0;
    double std_accuracy = 0;
    double mean_bases = 0;               // surviving bases per binary model
    int n_pair_models = 1;
    double wall_seconds = 0;             // excluded from deterministic output
    double mean_outer_iterations = 0;
    bool failed = false;
    std::string error;
};

void finalize_stats(MetricsRecord& rec);

}  // namespace dqnsbl
