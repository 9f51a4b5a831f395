#pragma once

#include <functional>
#include <vector>

#include "dqnsbl/objective.hpp"

namespace dqnsbl {

struct DqnConfig {
    double grad_tolerance = 1e-1;   // epsilon
    int max_iterations = 100;       // MaxIts_qn
    double curvature_floor = 1e-10; // skip diagonal update when gammaᵀdelta below this
    double diag_clamp_low = 1e-8;
    double diag_clamp_high = 1e8;
    double c1 = 1e-4;               // Armijo
    double c2 = 0.9;                // strong Wolfe curvature
    int max_ls_steps = 20;
};

struct DqnResult {
    std::vector<double> w;
    std::vector<double> diag_b;  // diagonal of the inverse-Hessian approximation
    int iterations = 0;
    double final_grad_norm = 0.0;
    bool converged = false;
};

struct DqnTraceRecord {
    int iteration;
    double objective;
    double grad_norm;
    double step;
};
using DqnTraceFn = std::function<void(const DqnTraceRecord&)>;

struct LineSearchResult {
    double eta = 0.0;
    double f = 0.0;
    std::vector<double> g;    // gradient at w + eta p
    bool strong_wolfe = false;
    bool ok = false;          // at least Armijo holds
};

// Element-wise inverse-Hessian diagonal update derived from the BFGS
// inverse formula. Skips when gammaᵀdelta <= curvature_floor; clamps each
// element into [diag_clamp_low, diag_clamp_high]; a non-finite or
// non-positive candidate keeps the previous value.
std::vector<double> diag_bfgs_update(const std::vector<double>& b,
                                     const std::vector<double>& delta,
                                     const std::vector<double>& gamma,
                                     const DqnConfig& cfg);

// Strong-Wolfe bracketing line search, initial trial eta = 1. `p` must be
// a descent direction. Falls back to the best Armijo step found.
LineSearchResult wolfe_line_search(const MapObjective& obj, const std::vector<double>& w,
                                   const std::vector<double>& p, const DqnConfig& cfg);

// `b0` warm-starts the inverse-Hessian diagonal (identity when null);
// the outer ARD loop passes the previous iteration's diagonal so B keeps
// converging across MAP stages instead of restarting from identity.
DqnResult dqn_minimize(const MapObjective& obj, const std::vector<double>& w0,
                       const DqnConfig& cfg, const DqnTraceFn& trace = nullptr,
                       const std::vector<double>* b0 = nullptr);

// Adapter for minimizing an arbitrary smooth function (test oracles,
// sanity problems).
struct CallableObjective {
    std::function<double(const std::vector<double>&, std::vector<double>&)> fn;

    double value_and_gradient(const std::vector<double>& w, std::vector<double>& g) const {
        return fn(w, g);
    }
    double value(const std::vector<double>& w) const {
        std::vector<double> g;
        return fn(w, g);
    }
    void check_dim(const std::vector<double>&) const {}
};

DqnResult dqn_minimize(const CallableObjective& obj, const std::vector<double>& w0,
                       const DqnConfig& cfg, const DqnTraceFn& trace = nullptr);
LineSearchResult wolfe_line_search(const CallableObjective& obj, const std::vector<double>& w,
                                   const std::vector<double>& p, const DqnConfig& cfg);

}  // namespace dqnsbl
