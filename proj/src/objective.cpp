#include "dqnsbl/objective.hpp"

#include <cmath>
#include <string>

#include "dqnsbl/kernels.hpp"

namespace dqnsbl {

void MapObjective::check_dim(const std::vector<double>& w) const {
    if (w.size() != dim())
        throw std::invalid_argument("MapObjective: weight dimension " +
                                    std::to_string(w.size()) + " != active dimension " +
                                    std::to_string(dim()));
    if (alpha.size() != dim())
        throw std::invalid_argument("MapObjective: alpha dimension mismatch");
}

double MapObjective::value(const std::vector<double>& w) const {
    check_dim(w);
    const std::size_t n = design->n_rows();
    const auto& t = *targets;

    std::vector<double> z(n), nll(n);
    design->times(w.data(), z.data());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) nll[i] = kernels::bernoulli_nll(z[i], t[i]);
    double value = kernels::sum(nll.data(), n);
    double penalty = 0.0;
    for (std::size_t k = 0; k < dim(); ++k) penalty += alpha[k] * w[k] * w[k];
    return value + 0.5 * penalty;
}

std::vector<double> MapObjective::gradient(const std::vector<double>& w) const {
    std::vector<double> g;
    value_and_gradient(w, g);
    return g;
}

double MapObjective::value_and_gradient(const std::vector<double>& w,
                                        std::vector<double>& g) const {
    check_dim(w);
    const std::size_t n = design->n_rows();
    const std::size_t m = dim();
    const auto& t = *targets;

    std::vector<double> z(n), nll(n);
    design->times(w.data(), z.data());

    const std::size_t nn = n;
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < nn; ++i) {
        nll[i] = kernels::bernoulli_nll(z[i], t[i]);
        z[i] = kernels::sigmoid(z[i]) - t[i];  // residual, reused for the gradient
    }
    double value = kernels::sum(nll.data(), n);

    g.resize(m);
    design->transpose_times(z.data(), g.data());

    double penalty = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        penalty += alpha[k] * w[k] * w[k];
        g[k] += alpha[k] * w[k];
    }
    return value + 0.5 * penalty;
}

std::vector<double> MapObjective::hessian(const std::vector<double>& w) const {
    check_dim(w);
    const std::size_t m = dim();
    if (m > kOracleMaxDim)
        throw OracleGuardError("hessian oracle refuses active dimension " +
                               std::to_string(m) + " > " + std::to_string(kOracleMaxDim));
    const std::size_t n = design->n_rows();
    const auto& t = *targets;
    (void)t;

    std::vector<double> z(n);
    design->times(w.data(), z.data());

    std::vector<double> H(m * m, 0.0);
    std::vector<double> row(m);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = kernels::sigmoid(z[i]);
        const double beta = y * (1.0 - y);
        design->gather_row(i, row.data());
        for (std::size_t a = 0; a < m; ++a) {
            const double ba = beta * row[a];
            if (ba == 0.0) continue;
            for (std::size_t b = 0; b < m; ++b) H[a * m + b] += ba * row[b];
        }
    }
    for (std::size_t k = 0; k < m; ++k) H[k * m + k] += alpha[k];
    return H;
}

}  // namespace dqnsbl
