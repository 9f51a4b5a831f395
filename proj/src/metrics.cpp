#include "dqnsbl/metrics.hpp"

#include <cmath>

namespace dqnsbl {

double accuracy(const OvoEnsemble& ens, const SparseDataset& ds,
                const std::vector<std::size_t>* subset) {
    std::size_t n = subset ? subset->size() : ds.n_rows();
    if (n == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = subset ? (*subset)[i] : i;
        if (ovo_predict(ens, ds.rows[r]) == ds.labels[r]) ++correct;
    }
    return 100.0 * correct / n;
}

void finalize_stats(MetricsRecord& rec) {
    const auto& f = rec.fold_accuracy;
    if (f.empty()) return;
    double mean = 0.0;
    for (double a : f) mean += a;
    mean /= f.size();
    double var = 0.0;
    for (double a : f) var += (a - mean) * (a - mean);
    var /= f.size();
    rec.mean_accuracy = mean;
    rec.std_accuracy = std::sqrt(var);
}

}  // namespace dqnsbl
