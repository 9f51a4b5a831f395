#include "dqnsbl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dqnsbl {

namespace {

double norm2(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

struct Probe {
    double f;
    double dphi;  // directional derivative along p
    std::vector<double> g;
};

template <class Obj>
Probe probe(const Obj& obj, const std::vector<double>& w, const std::vector<double>& p,
            double eta) {
    std::vector<double> wt(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) wt[k] = w[k] + eta * p[k];
    Probe pr;
    pr.f = obj.value_and_gradient(wt, pr.g);
    pr.dphi = dot(pr.g, p);
    return pr;
}

template <class Obj>
LineSearchResult wolfe_ls_impl(const Obj& obj, const std::vector<double>& w,
                               const std::vector<double>& p, double f0, double dphi0,
                               const DqnConfig& cfg) {
    LineSearchResult best;  // best Armijo-satisfying point so far
    auto armijo = [&](double eta, double f) { return f <= f0 + cfg.c1 * eta * dphi0; };
    auto curvature = [&](double dphi) { return std::fabs(dphi) <= cfg.c2 * std::fabs(dphi0); };
    auto record = [&](double eta, Probe& pr, bool strong) {
        if (!best.ok || pr.f < best.f || strong) {
            best.eta = eta;
            best.f = pr.f;
            best.g = std::move(pr.g);
            best.ok = true;
            best.strong_wolfe = strong;
        }
    };

    // bisect an interval [lo, hi] known to bracket a strong-Wolfe point
    auto zoom = [&](double lo, double f_lo, double hi, int budget) {
        for (int i = 0; i < budget; ++i) {
            const double eta = 0.5 * (lo + hi);
            Probe pr = probe(obj, w, p, eta);
            if (!armijo(eta, pr.f) || pr.f >= f_lo) {
                hi = eta;
                continue;
            }
            if (curvature(pr.dphi)) {
                record(eta, pr, true);
                return;
            }
            const double f_new = pr.f, dphi_new = pr.dphi;
            record(eta, pr, false);
            if (dphi_new * (hi - lo) >= 0.0) hi = lo;
            lo = eta;
            f_lo = f_new;
        }
    };

    double eta_prev = 0.0, f_prev = f0;
    double eta = 1.0;
    for (int i = 0; i < cfg.max_ls_steps; ++i) {
        Probe pr = probe(obj, w, p, eta);
        if (!armijo(eta, pr.f) || (i > 0 && pr.f >= f_prev)) {
            zoom(eta_prev, f_prev, eta, cfg.max_ls_steps - i);
            break;
        }
        if (curvature(pr.dphi)) {
            record(eta, pr, true);
            break;
        }
        const double f_new = pr.f, dphi_new = pr.dphi;
        record(eta, pr, false);
        if (dphi_new >= 0.0) {
            zoom(eta, f_new, eta_prev, cfg.max_ls_steps - i);
            break;
        }
        eta_prev = eta;
        f_prev = f_new;
        eta *= 2.0;
    }
    if (best.ok) return best;

    // Armijo backtracking fallback
    eta = 1.0;
    for (int i = 0; i < 2 * cfg.max_ls_steps; ++i) {
        Probe pr = probe(obj, w, p, eta);
        if (armijo(eta, pr.f)) {
            record(eta, pr, false);
            return best;
        }
        eta *= 0.5;
    }
    return best;  // ok == false
}

template <class Obj>
DqnResult dqn_minimize_impl(const Obj& obj, const std::vector<double>& w0,
                            const DqnConfig& cfg, const DqnTraceFn& trace,
                            const std::vector<double>* b0 = nullptr) {
    obj.check_dim(w0);
    const std::size_t m = w0.size();

    DqnResult res;
    res.w = w0;
    if (b0 != nullptr && b0->size() == m)
        res.diag_b = *b0;
    else
        res.diag_b.assign(m, 1.0);

    std::vector<double> g(m);
    double f = obj.value_and_gradient(res.w, g);
    double gnorm = norm2(g);
    if (trace) trace({0, f, gnorm, 0.0});

    std::vector<double> p(m), delta(m), gamma(m);
    while (gnorm > cfg.grad_tolerance && res.iterations < cfg.max_iterations) {
        for (std::size_t k = 0; k < m; ++k) p[k] = -res.diag_b[k] * g[k];
        double pnorm = norm2(p);
        if (!(pnorm > 0.0) || dot(g, p) >= 0.0) {
            // not a descent direction: reset to steepest descent
            p = g;
            for (auto& x : p) x = -x;
            pnorm = gnorm;
        }
        for (std::size_t k = 0; k < m; ++k) p[k] /= pnorm;

        LineSearchResult ls = wolfe_ls_impl(obj, res.w, p, f, dot(g, p), cfg);
        if (!ls.ok) {
            res.converged = false;
            res.final_grad_norm = gnorm;
            return res;
        }

        for (std::size_t k = 0; k < m; ++k) {
            delta[k] = ls.eta * p[k];
            res.w[k] += delta[k];
            gamma[k] = ls.g[k] - g[k];
        }
        res.diag_b = diag_bfgs_update(res.diag_b, delta, gamma, cfg);
        g = std::move(ls.g);
        f = ls.f;
        gnorm = norm2(g);
        ++res.iterations;
        if (trace) trace({res.iterations, f, gnorm, ls.eta});
    }
    res.final_grad_norm = gnorm;
    res.converged = gnorm <= cfg.grad_tolerance;
    return res;
}

}  // namespace

std::vector<double> diag_bfgs_update(const std::vector<double>& b,
                                     const std::vector<double>& delta,
                                     const std::vector<double>& gamma,
                                     const DqnConfig& cfg) {
    if (delta.size() != b.size() || gamma.size() != b.size())
        throw std::invalid_argument("diag_bfgs_update: dimension mismatch");

    const double gd = dot(gamma, delta);
    if (gd <= cfg.curvature_floor) return b;  // curvature safeguard: skip

    double s = 0.0;  // deltaᵀ B⁻¹ delta
    for (std::size_t k = 0; k < b.size(); ++k) s += delta[k] * delta[k] / b[k];

    std::vector<double> out(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) {
        double inv = 1.0 / b[k] + gamma[k] * gamma[k] / gd -
                     delta[k] * delta[k] / (b[k] * b[k] * s);
        double v = 1.0 / inv;
        if (!std::isfinite(v) || v <= 0.0) v = b[k];
        out[k] = std::clamp(v, cfg.diag_clamp_low, cfg.diag_clamp_high);
    }
    return out;
}

LineSearchResult wolfe_line_search(const MapObjective& obj, const std::vector<double>& w,
                                   const std::vector<double>& p, const DqnConfig& cfg) {
    std::vector<double> g0(w.size());
    const double f0 = obj.value_and_gradient(w, g0);
    return wolfe_ls_impl(obj, w, p, f0, dot(g0, p), cfg);
}

LineSearchResult wolfe_line_search(const CallableObjective& obj, const std::vector<double>& w,
                                   const std::vector<double>& p, const DqnConfig& cfg) {
    std::vector<double> g0(w.size());
    const double f0 = obj.value_and_gradient(w, g0);
    return wolfe_ls_impl(obj, w, p, f0, dot(g0, p), cfg);
}

DqnResult dqn_minimize(const MapObjective& obj, const std::vector<double>& w0,
                       const DqnConfig& cfg, const DqnTraceFn& trace,
                       const std::vector<double>* b0) {
    return dqn_minimize_impl(obj, w0, cfg, trace, b0);
}

DqnResult dqn_minimize(const CallableObjective& obj, const std::vector<double>& w0,
                       const DqnConfig& cfg, const DqnTraceFn& trace) {
    return dqn_minimize_impl(obj, w0, cfg, trace);
}

}  // namespace dqnsbl
