#include "dqnsbl/feature_map.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "dqnsbl/kernels.hpp"

namespace dqnsbl {

const char* map_kind_name(MapKind k) {
    switch (k) {
        case MapKind::linear: return "linear";
        case MapKind::rvm_kernel: return "rvm";
        case MapKind::sbelm_layer: return "sbelm";
    }
    return "?";
}

MapKind map_kind_from_name(const std::string& name) {
    if (name == "linear") return MapKind::linear;
    if (name == "rvm") return MapKind::rvm_kernel;
    if (name == "sbelm") return MapKind::sbelm_layer;
    throw std::invalid_argument("unknown feature map: " + name);
}

RandomLayer make_random_layer(int hidden, std::uint32_t seed, int input_dim) {
    RandomLayer layer;
    layer.hidden = hidden;
    layer.seed = seed;
    layer.input_dim = input_dim;
    // mt19937 output words mapped to [-1, 1]; fully specified by the
    // standard, so (hidden, seed, input_dim) regenerates the layer
    // bit-exactly on any platform.
    std::mt19937 rng(seed);
    auto uniform = [&rng] { return 2.0 * (static_cast<double>(rng()) / 4294967295.0) - 1.0; };
    layer.synapses.resize(static_cast<std::size_t>(hidden) * input_dim);
    for (auto& v : layer.synapses) v = uniform();
    layer.biases.resize(hidden);
    for (auto& v : layer.biases) v = uniform();
    return layer;
}

std::size_t FeatureMap::n_basis() const {
    switch (kind) {
        case MapKind::linear: return n_features;
        case MapKind::rvm_kernel: return references.size();
        case MapKind::sbelm_layer: return layer.hidden;
    }
    return 0;
}

FeatureMap linear_map(int n_features) {
    FeatureMap m;
    m.kind = MapKind::linear;
    m.n_features = n_features;
    return m;
}

FeatureMap rvm_map(std::vector<SparseRow> references, double sigma, int n_features) {
    // an empty reference set is a template: training fills in the rows
    if (!(sigma > 0.0)) throw std::invalid_argument("rvm_map: sigma must be positive");
    FeatureMap m;
    m.kind = MapKind::rvm_kernel;
    m.n_features = n_features;
    m.references = std::move(references);
    m.sigma = sigma;
    return m;
}

FeatureMap sbelm_map(int hidden, std::uint32_t seed, int n_features) {
    FeatureMap m;
    m.kind = MapKind::sbelm_layer;
    m.n_features = n_features;
    m.layer = make_random_layer(hidden, seed, n_features);
    return m;
}

double sparse_sq_distance(const SparseRow& a, const SparseRow& b) {
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].index == b[j].index) {
            const double d = a[i].value - b[j].value;
            acc += d * d;
            ++i;
            ++j;
        } else if (a[i].index < b[j].index) {
            acc += a[i].value * a[i].value;
            ++i;
        } else {
            acc += b[j].value * b[j].value;
            ++j;
        }
    }
    for (; i < a.size(); ++i) acc += a[i].value * a[i].value;
    for (; j < b.size(); ++j) acc += b[j].value * b[j].value;
    return acc;
}

std::vector<double> gaussian_kernel_map(const std::vector<SparseRow>& references,
                                        const SparseRow& x, double sigma) {
    std::vector<double> phi(references.size());
    const double inv_s2 = 1.0 / (sigma * sigma);
    for (std::size_t j = 0; j < references.size(); ++j)
        phi[j] = std::exp(-sparse_sq_distance(x, references[j]) * inv_s2);
    return phi;
}

std::vector<double> random_layer_map(const RandomLayer& layer, const SparseRow& x) {
    std::vector<double> act(layer.hidden);
    for (int l = 0; l < layer.hidden; ++l) {
        const double* a = layer.synapses.data() + static_cast<std::size_t>(l) * layer.input_dim;
        double z = layer.biases[l];
        for (const auto& e : x)
            if (e.index < layer.input_dim) z += a[e.index] * e.value;
        act[l] = kernels::sigmoid(z);
    }
    return act;
}

std::vector<double> map_row(const FeatureMap& map, const SparseRow& x) {
    switch (map.kind) {
        case MapKind::linear: {
            std::vector<double> out(map.n_features, 0.0);
            for (const auto& e : x)
                if (e.index < map.n_features) out[e.index] = e.value;
            return out;
        }
        case MapKind::rvm_kernel:
            return gaussian_kernel_map(map.references, x, map.sigma);
        case MapKind::sbelm_layer:
            return random_layer_map(map.layer, x);
    }
    throw std::logic_error("map_row: bad kind");
}

DesignMatrix build_design(const FeatureMap& map, const std::vector<SparseRow>& rows) {
    if (map.kind == MapKind::linear)
        return DesignMatrix::linear(&rows, map.n_features);

    const std::size_t n = rows.size();
    const std::size_t m = map.n_basis();
    std::vector<double> data(n * m);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> phi = map_row(map, rows[i]);
        std::copy(phi.begin(), phi.end(), data.begin() + i * m);
    }
    return DesignMatrix::dense(std::move(data), n, m);
}

}  // namespace dqnsbl
