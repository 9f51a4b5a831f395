#pragma once

#include <functional>
#include <vector>

#include "dqnsbl/dqn.hpp"
#include "dqnsbl/objective.hpp"

namespace dqnsbl {

struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SblConfig {
    int max_outer_its = 100;       // MaxIts
    double alpha_max = 1e6;        // ALPHA_MAX
    double delta_logalpha = 1e-3;  // DELTA_LOGALPHA
    double c = 1e-4;               // fallback constant in the alpha update
    double init_alpha = 1e-2;
    bool prune_bias = false;       // bias column exempt by default
    DqnConfig inner;
};

// Active-set view of the fit: surviving columns, their weights, priors
// and the last MAP-stage inverse-Hessian diagonal. Pruned columns have
// weight fixed at zero and never re-enter.
struct ArdState {
    std::vector<int> active;       // original column ids, ascending
    std::vector<double> w;         // over active
    std::vector<double> alpha;     // over active
    std::vector<double> diag_b;    // over active
    std::vector<int> pruned;       // original column ids
};

struct FitReport {
    int outer_iterations = 0;
    std::vector<std::size_t> active_count_history;
    bool converged = false;
    long fallback_count = 0;                 // total c-branch activations
    std::vector<long> fallback_history;      // per outer iteration
    std::size_t peak_scratch_doubles = 0;    // auxiliary-memory audit
    bool bias_rescued = false;               // all columns pruned, bias kept
};

// Called after every outer iteration; return false to stop the fit.
using ArdIterationFn = std::function<bool(int iteration, const ArdState&)>;

// alpha'_k = (1 - alpha_k b_k)/w_k^2 when positive, else c/w_k^2; an
// exactly-zero weight forces the prune threshold.
std::vector<double> ard_update(const std::vector<double>& alpha,
                               const std::vector<double>& w,
                               const std::vector<double>& diag_b,
                               double c, double alpha_max,
                               long* fallback_count = nullptr);

bool log_alpha_converged(const std::vector<double>& alpha_old,
                         const std::vector<double>& alpha_new,
                         const std::vector<std::size_t>& shared_slots,
                         double tol);

// Algorithm: alternate the DQN MAP stage and the alpha update with
// pruning until the log-alpha test passes or max_outer_its is reached.
// `design` is mutated (its active set shrinks) and left in final state.
std::pair<ArdState, FitReport> dqn_sbl_fit(DesignMatrix& design,
                                           const std::vector<double>& targets,
                                           const SblConfig& cfg,
                                           const ArdIterationFn& on_iteration = nullptr,
                                           const DqnTraceFn& trace = nullptr);

// Classical SBL oracle: damped-Newton MAP stage with the dense Hessian,
// covariance = inverse Hessian at the mode, then the same alpha update
// driven by the covariance diagonal. Dense guard: refuses more than
// kOracleMaxDim active columns. Throws IllConditionedError when the
// Hessian cannot be factorized.
std::pair<ArdState, FitReport> classic_sbl_fit(DesignMatrix& design,
                                               const std::vector<double>& targets,
                                               const SblConfig& cfg,
                                               const ArdIterationFn& on_iteration = nullptr);

}  // namespace dqnsbl
