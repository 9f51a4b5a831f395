#include "dqnsbl/ard.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <Eigen/Dense>

namespace dqnsbl {

std::vector<double> ard_update(const std::vector<double>& alpha,
                               const std::vector<double>& w,
                               const std::vector<double>& diag_b,
                               double c, double alpha_max,
                               long* fallback_count) {
    if (w.size() != alpha.size() || diag_b.size() != alpha.size())
        throw std::invalid_argument("ard_update: dimension mismatch");
    std::vector<double> out(alpha.size());
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (w[k] == 0.0) {
            out[k] = 2.0 * alpha_max;  // forced prune
            continue;
        }
        const double w2 = w[k] * w[k];
        const double q = 1.0 - alpha[k] * diag_b[k];
        if (q > 0.0) {
            out[k] = q / w2;
        } else {
            out[k] = c / w2;
            if (fallback_count) ++*fallback_count;
        }
    }
    return out;
}

bool log_alpha_converged(const std::vector<double>& alpha_old,
                         const std::vector<double>& alpha_new,
                         const std::vector<std::size_t>& shared_slots,
                         double tol) {
    double worst = 0.0;
    for (std::size_t s : shared_slots)
        worst = std::max(worst, std::fabs(std::log(alpha_new[s]) - std::log(alpha_old[s])));
    return worst < tol;
}

namespace {

// MAP stage contract: minimize L over the current active set from the
// warm start, return the minimizer and a positive per-column diagnostic
// (inverse-Hessian diagonal for DQN, covariance diagonal for classic).
struct MapStageResult {
    std::vector<double> w;
    std::vector<double> diag;
};
using MapStageFn = std::function<MapStageResult(
    const MapObjective&, const std::vector<double>&, const std::vector<double>&)>;

std::pair<ArdState, FitReport> run_sbl(DesignMatrix& design,
                                       const std::vector<double>& targets,
                                       const SblConfig& cfg,
                                       const MapStageFn& map_stage,
                                       const ArdIterationFn& on_iteration,
                                       std::size_t scratch_per_m,
                                       std::size_t scratch_per_n) {
    if (design.n_rows() == 0 || design.n_active() == 0)
        throw std::invalid_argument("sbl fit: empty design");
    if (targets.size() != design.n_rows())
        throw std::invalid_argument("sbl fit: target length mismatch");

    ArdState state;
    state.active = design.active();
    state.w.assign(state.active.size(), 0.0);
    state.alpha.assign(state.active.size(), cfg.init_alpha);
    state.diag_b.assign(state.active.size(), 1.0);

    FitReport report;
    for (int outer = 1; outer <= cfg.max_outer_its; ++outer) {
        const std::size_t m = state.active.size();
        report.peak_scratch_doubles = std::max(
            report.peak_scratch_doubles, scratch_per_m * m + scratch_per_n * design.n_rows());

        MapObjective obj{&design, &targets, state.alpha};
        MapStageResult map = map_stage(obj, state.w, state.diag_b);
        state.w = std::move(map.w);
        state.diag_b = std::move(map.diag);

        long fb = 0;
        std::vector<double> alpha_new =
            ard_update(state.alpha, state.w, state.diag_b, cfg.c, cfg.alpha_max, &fb);
        report.fallback_count += fb;
        report.fallback_history.push_back(fb);

        std::vector<std::size_t> keep_slots;
        keep_slots.reserve(m);
        for (std::size_t s = 0; s < m; ++s) {
            const bool exempt = !cfg.prune_bias && state.active[s] == 0;
            if (alpha_new[s] > cfg.alpha_max && !exempt) {
                state.pruned.push_back(state.active[s]);
            } else {
                if (exempt) alpha_new[s] = std::min(alpha_new[s], cfg.alpha_max);
                keep_slots.push_back(s);
            }
        }
        if (keep_slots.empty()) {
            // everything pruned: keep the bias so a valid predictor remains
            std::cerr << "warning: all columns pruned; keeping bias column\n";
            report.bias_rescued = true;
            state.pruned.erase(std::remove(state.pruned.begin(), state.pruned.end(), 0),
                               state.pruned.end());
            state.active = {0};
            state.w = {0.0};
            state.alpha = {cfg.alpha_max};
            state.diag_b = {1.0};
            design.set_active(state.active);
            report.outer_iterations = outer;
            report.active_count_history.push_back(1);
            break;
        }

        // the prior-precision change shifts the MAP Hessian diagonal by
        // exactly alpha_new - alpha_old; fold that into the carried
        // inverse-Hessian diagonal so the next warm start tracks it
        auto shifted_b = [&](double b, double a_old, double a_new) {
            double inv = 1.0 / b + (a_new - a_old);
            inv = std::max(inv, 1.0 / cfg.inner.diag_clamp_high);
            return std::clamp(1.0 / inv, cfg.inner.diag_clamp_low,
                              cfg.inner.diag_clamp_high);
        };

        const bool pruned_now = keep_slots.size() < m;
        // a pruning iteration cannot alone trigger convergence
        const bool converged =
            !pruned_now && log_alpha_converged(state.alpha, alpha_new, keep_slots,
                                               cfg.delta_logalpha);

        if (pruned_now) {
            std::vector<int> active;
            std::vector<double> w, alpha, diag_b;
            active.reserve(keep_slots.size());
            for (std::size_t s : keep_slots) {
                active.push_back(state.active[s]);
                w.push_back(state.w[s]);
                alpha.push_back(alpha_new[s]);
                diag_b.push_back(shifted_b(state.diag_b[s], state.alpha[s], alpha_new[s]));
            }
            state.active = std::move(active);
            state.w = std::move(w);
            state.alpha = std::move(alpha);
            state.diag_b = std::move(diag_b);
            design.set_active(state.active);
        } else {
            for (std::size_t s = 0; s < m; ++s)
                state.diag_b[s] = shifted_b(state.diag_b[s], state.alpha[s], alpha_new[s]);
            state.alpha = std::move(alpha_new);
        }

        report.outer_iterations = outer;
        report.active_count_history.push_back(state.active.size());

        if (on_iteration && !on_iteration(outer, state)) break;
        if (converged) {
            report.converged = true;
            break;
        }
    }
    return {std::move(state), std::move(report)};
}

}  // namespace

std::pair<ArdState, FitReport> dqn_sbl_fit(DesignMatrix& design,
                                           const std::vector<double>& targets,
                                           const SblConfig& cfg,
                                           const ArdIterationFn& on_iteration,
                                           const DqnTraceFn& trace) {
    auto map_stage = [&](const MapObjective& obj, const std::vector<double>& w0,
                         const std::vector<double>& prev_diag) {
        DqnResult r = dqn_minimize(obj, w0, cfg.inner, trace, &prev_diag);
        return MapStageResult{std::move(r.w), std::move(r.diag_b)};
    };
    // optimizer scratch: w, b, g, p, delta, gamma + line-search trial
    // point/gradient + alpha copies; per-row: z, nll, residual
    return run_sbl(design, targets, cfg, map_stage, on_iteration, 12, 6);
}

std::pair<ArdState, FitReport> classic_sbl_fit(DesignMatrix& design,
                                               const std::vector<double>& targets,
                                               const SblConfig& cfg,
                                               const ArdIterationFn& on_iteration) {
    if (design.n_active() > kOracleMaxDim)
        throw OracleGuardError("classic engine refuses active dimension " +
                               std::to_string(design.n_active()) + " > " +
                               std::to_string(kOracleMaxDim));

    auto map_stage = [&](const MapObjective& obj, const std::vector<double>& w0,
                         const std::vector<double>&) {
        const std::size_t m = obj.dim();
        std::vector<double> w = w0;
        // damped Newton on L(w)
        for (int it = 0; it < cfg.inner.max_iterations; ++it) {
            std::vector<double> g(m);
            const double f = obj.value_and_gradient(w, g);
            double gnorm = 0.0;
            for (double x : g) gnorm += x * x;
            if (std::sqrt(gnorm) <= cfg.inner.grad_tolerance) break;

            std::vector<double> H = obj.hessian(w);
            Eigen::Map<Eigen::MatrixXd> Hm(H.data(), m, m);
            Eigen::Map<Eigen::VectorXd> gv(g.data(), m);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(Hm);
            if (ldlt.info() != Eigen::Success)
                throw IllConditionedError("classic MAP stage: Hessian factorization failed");
            Eigen::VectorXd d = ldlt.solve(-gv);
            if (!d.allFinite())
                throw IllConditionedError("classic MAP stage: singular Newton system");

            double eta = 1.0;
            bool accepted = false;
            std::vector<double> wt(m);
            for (int h = 0; h < 40; ++h) {
                for (std::size_t k = 0; k < m; ++k) wt[k] = w[k] + eta * d[k];
                if (obj.value(wt) <= f) {
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if (!accepted) break;  // stalled at numerical floor
            w = wt;
        }

        // covariance = inverse Hessian at the mode
        std::vector<double> H = obj.hessian(w);
        Eigen::Map<Eigen::MatrixXd> Hm(H.data(), m, m);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Hm);
        if (ldlt.info() != Eigen::Success)
            throw IllConditionedError("classic A stage: Hessian factorization failed");
        Eigen::MatrixXd Sigma = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
        if (!Sigma.allFinite())
            throw IllConditionedError("classic A stage: covariance not finite");

        MapStageResult out;
        out.w = std::move(w);
        out.diag.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            out.diag[k] = Sigma(k, k);
            if (!(out.diag[k] > 0.0) || !std::isfinite(out.diag[k]))
                throw IllConditionedError("classic A stage: non-positive covariance diagonal");
        }
        return out;
    };
    return run_sbl(design, targets, cfg, map_stage, on_iteration, 12, 6);
}

}  // namespace dqnsbl
