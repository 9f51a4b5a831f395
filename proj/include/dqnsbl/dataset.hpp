#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dqnsbl {

// One stored feature of a sparse row. `index` is 0-based internally;
// LIBSVM files are 1-based and converted on parse/serialize.
struct SparseEntry {
    int index;
    double value;
};

using SparseRow = std::vector<SparseEntry>;

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, long line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    long line;
};

// Row-sparse observation matrix with class labels. Immutable after
// construction; safe to share across workers.
struct SparseDataset {
    std::vector<SparseRow> rows;
    std::vector<double> labels;  // class identifiers, preserved verbatim
    int n_features = 0;          // >= max observed feature index

    std::size_t n_rows() const { return rows.size(); }
    std::vector<double> distinct_classes() const;  // ascending
    SparseDataset subset(const std::vector<std::size_t>& idx) const;
};

SparseDataset parse_libsvm(std::istream& in);
SparseDataset parse_libsvm_string(const std::string& text);
SparseDataset load_libsvm_file(const std::string& path);
void serialize_libsvm(const SparseDataset& ds, std::ostream& out);

// Per-feature [min, max] statistics fitted on training rows; absent
// entries count as value 0. Degenerate features (min == max) map to 0.
struct Scaler {
    std::vector<double> min;
    std::vector<double> max;

    double scale_value(int feature, double v) const;
    double scaled_zero(int feature) const { return scale_value(feature, 0.0); }
    SparseRow apply_row(const SparseRow& row) const;
};

Scaler fit_scaler(const SparseDataset& ds);
SparseDataset apply_scaler(const Scaler& s, const SparseDataset& ds);

// A binarized one-vs-one subproblem: row indices into the parent dataset
// plus {0,1} targets. class_a maps to target 1 (the larger identifier).
struct BinaryProblem {
    std::vector<std::size_t> row_indices;
    std::vector<double> targets;
    double class_a = 0;  // target 1
    double class_b = 0;  // target 0
};

std::vector<BinaryProblem> ovo_decompose(const SparseDataset& ds);

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

std::vector<FoldSplit> kfold_split(const SparseDataset& ds, int k, std::uint32_t seed);

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
train_test_split(const SparseDataset& ds, double train_fraction, std::uint32_t seed);

}  // namespace dqnsbl
