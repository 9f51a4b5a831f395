#pragma once

#include <cstdint>
#include <vector>

#include "dqnsbl/dataset.hpp"
#include "dqnsbl/design.hpp"

namespace dqnsbl {

enum class MapKind { linear, rvm_kernel, sbelm_layer };

const char* map_kind_name(MapKind k);
MapKind map_kind_from_name(const std::string& name);

// Random sigmoid hidden layer: L nodes, synapses and biases uniform in
// [-1, 1], regenerated exactly from (hidden, seed, input_dim).
struct RandomLayer {
    int hidden = 0;
    std::uint32_t seed = 0;
    int input_dim = 0;
    std::vector<double> synapses;  // row-major hidden x input_dim
    std::vector<double> biases;    // hidden
};

// Deterministic across platforms: mt19937(seed) words mapped affinely to
// [-1, 1], filling the synapse block row-major, then the biases.
RandomLayer make_random_layer(int hidden, std::uint32_t seed, int input_dim);

struct FeatureMap {
    MapKind kind = MapKind::linear;
    int n_features = 0;               // raw input dimension
    // rvm_kernel
    std::vector<SparseRow> references;
    double sigma = 1.0;
    // sbelm_layer
    RandomLayer layer;

    std::size_t n_basis() const;      // columns excluding bias
};

FeatureMap linear_map(int n_features);
FeatureMap rvm_map(std::vector<SparseRow> references, double sigma, int n_features);
FeatureMap sbelm_map(int hidden, std::uint32_t seed, int n_features);

// phi_j = exp(-||x - r_j||^2 / sigma^2)
std::vector<double> gaussian_kernel_map(const std::vector<SparseRow>& references,
                                        const SparseRow& x, double sigma);

// L sigmoid activations of (a x + b)
std::vector<double> random_layer_map(const RandomLayer& layer, const SparseRow& x);

// Dense basis row for any map kind (excluding the bias).
std::vector<double> map_row(const FeatureMap& map, const SparseRow& x);

// Design matrix over `rows`. Linear mode aliases `rows`, which must
// outlive the design matrix.
DesignMatrix build_design(const FeatureMap& map, const std::vector<SparseRow>& rows);

double sparse_sq_distance(const SparseRow& a, const SparseRow& b);

}  // namespace dqnsbl
