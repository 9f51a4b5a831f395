#pragma once

#include <stdexcept>
#include <vector>

#include "dqnsbl/design.hpp"

namespace dqnsbl {

struct OracleGuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Negative log-posterior of the logistic MAP problem:
//   L(w) = -sum_i [t_i log y_i + (1-t_i) log(1-y_i)] + 1/2 wᵀ A w,
// y_i = sigmoid(x_iᵀ w), A = diag(alpha) over the active columns.
struct MapObjective {
    const DesignMatrix* design;
    const std::vector<double>* targets;  // {0,1}, length n_rows
    std::vector<double> alpha;           // > 0, length n_active

    std::size_t dim() const { return design->n_active(); }

    double value(const std::vector<double>& w) const;
    std::vector<double> gradient(const std::vector<double>& w) const;
    double value_and_gradient(const std::vector<double>& w, std::vector<double>& g) const;

    // Dense XᵀβX + A (row-major dim x dim). Small-scale oracle only;
    // refuses dim > 5000.
    std::vector<double> hessian(const std::vector<double>& w) const;

    void check_dim(const std::vector<double>& w) const;
};

inline constexpr std::size_t kOracleMaxDim = 5000;

}  // namespace dqnsbl
