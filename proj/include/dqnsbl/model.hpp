#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dqnsbl/ard.hpp"
#include "dqnsbl/dataset.hpp"
#include "dqnsbl/feature_map.hpp"

namespace dqnsbl {

enum class Engine { dqn, classic };
const char* engine_name(Engine e);
Engine engine_from_name(const std::string& name);

// One trained binary classifier: scaler, feature map restricted to the
// surviving bases, and the surviving weights. class_a is predicted when
// the probability is >= 0.5.
struct BinaryModel {
    FeatureMap map;
    std::optional<Scaler> scaler;
    std::vector<int> active;   // surviving design columns (0 = bias)
    std::vector<double> w;     // aligned with active
    double class_a = 1;        // target 1
    double class_b = 0;

    std::size_t n_bases() const { return active.size(); }
};

double predict_proba(const BinaryModel& model, const SparseRow& x);

struct OvoEnsemble {
    std::vector<double> classes;      // ascending
    std::vector<BinaryModel> models;  // pair (i,j), i<j, enumerated ascending
};

double ovo_predict(const OvoEnsemble& ens, const SparseRow& x);
// Accumulated probability mass per class (sums to K(K-1)/2).
std::vector<double> ovo_scores(const OvoEnsemble& ens, const SparseRow& x);

struct TrainOptions {
    Engine engine = Engine::dqn;
    SblConfig sbl;
    bool scale = true;
    DqnTraceFn trace = nullptr;
};

// Fit one binary subproblem with the chosen feature map. For rvm_kernel
// the stored references are exactly the training rows whose kernel
// columns survived pruning.
BinaryModel train_binary(const SparseDataset& ds, const BinaryProblem& problem,
                         const FeatureMap& map_template, const TrainOptions& opt,
                         FitReport* report = nullptr);

OvoEnsemble train_ovo(const SparseDataset& ds, const FeatureMap& map_template,
                      const TrainOptions& opt, std::vector<FitReport>* reports = nullptr);

// L2-regularized logistic regression baseline: same MAP objective with
// fixed alpha = lambda, no alpha update, no pruning.
std::vector<double> lr_l2_fit(DesignMatrix& design, const std::vector<double>& targets,
                              double lambda, const DqnConfig& cfg);

struct EarlyStoppingCurvePoint {
    int iteration;
    double sparsity_ratio;      // 1 - nnz(w)/M
    double validation_accuracy; // CV mean
    double test_accuracy;       // on the retrain pass, NaN if no test set
};

struct EarlyStoppingResult {
    BinaryModel model;
    int best_iteration = 0;
    std::vector<EarlyStoppingCurvePoint> curve;
};

// Linear-mode early-stopping protocol: k-fold CV records validation
// accuracy after every outer iteration, picks the earliest iteration
// with the best mean, then retrains on the full set stopped there.
EarlyStoppingResult early_stopping_fit(const SparseDataset& train, int folds,
                                       const TrainOptions& opt, std::uint32_t seed,
                                       const SparseDataset* test = nullptr);

// Versioned JSON model document; byte-exact round trip.
std::string serialize_model(const OvoEnsemble& ens);
OvoEnsemble deserialize_model(const std::string& text);
void save_model(const OvoEnsemble& ens, const std::string& path);
OvoEnsemble load_model(const std::string& path);

}  // namespace dqnsbl
