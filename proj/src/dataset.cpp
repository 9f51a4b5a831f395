#include "dqnsbl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace dqnsbl {

namespace {

bool parse_double(const char* begin, const char* end, double& out) {
    auto [p, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && p == end;
}

bool parse_int(const char* begin, const char* end, int& out) {
    auto [p, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && p == end;
}

}  // namespace

std::vector<double> SparseDataset::distinct_classes() const {
    std::set<double> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

SparseDataset SparseDataset::subset(const std::vector<std::size_t>& idx) const {
    SparseDataset out;
    out.n_features = n_features;
    out.rows.reserve(idx.size());
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) {
        out.rows.push_back(rows[i]);
        out.labels.push_back(labels[i]);
    }
    return out;
}

SparseDataset parse_libsvm(std::istream& in) {
    SparseDataset ds;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;

        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        double label;
        if (!parse_double(tok.data(), tok.data() + tok.size(), label))
            throw ParseError("malformed label '" + tok + "'", line_no);

        SparseRow row;
        int prev_index = 0;
        while (ls >> tok) {
            std::size_t colon = tok.find(':');
            if (colon == std::string::npos)
                throw ParseError("expected idx:val, got '" + tok + "'", line_no);
            int idx;
            double val;
            if (!parse_int(tok.data(), tok.data() + colon, idx))
                throw ParseError("malformed feature index in '" + tok + "'", line_no);
            if (!parse_double(tok.data() + colon + 1, tok.data() + tok.size(), val))
                throw ParseError("malformed feature value in '" + tok + "'", line_no);
            if (idx < 1)
                throw ParseError("feature index " + std::to_string(idx) + " < 1", line_no);
            if (idx <= prev_index)
                throw ParseError("non-ascending feature index " + std::to_string(idx), line_no);
            prev_index = idx;
            row.push_back({idx - 1, val});
            ds.n_features = std::max(ds.n_features, idx);
        }
        ds.rows.push_back(std::move(row));
        ds.labels.push_back(label);
    }
    return ds;
}

SparseDataset parse_libsvm_string(const std::string& text) {
    std::istringstream in(text);
    return parse_libsvm(in);
}

SparseDataset load_libsvm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return parse_libsvm(in);
}

void serialize_libsvm(const SparseDataset& ds, std::ostream& out) {
    char buf[64];
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", ds.labels[i]);
        out << buf;
        for (const auto& e : ds.rows[i]) {
            std::snprintf(buf, sizeof buf, " %d:%.17g", e.index + 1, e.value);
            out << buf;
        }
        out << '\n';
    }
}

Scaler fit_scaler(const SparseDataset& ds) {
    Scaler s;
    const int m = ds.n_features;
    s.min.assign(m, 0.0);
    s.max.assign(m, 0.0);
    std::vector<std::size_t> seen(m, 0);
    bool first = true;
    for (const auto& row : ds.rows) {
        for (const auto& e : row) {
            if (seen[e.index] == 0) {
                s.min[e.index] = e.value;
                s.max[e.index] = e.value;
            } else {
                s.min[e.index] = std::min(s.min[e.index], e.value);
                s.max[e.index] = std::max(s.max[e.index], e.value);
            }
            ++seen[e.index];
        }
        first = false;
    }
    (void)first;
    // implicit zeros participate in the range
    for (int f = 0; f < m; ++f) {
        if (seen[f] < ds.n_rows()) {
            s.min[f] = std::min(s.min[f], 0.0);
            s.max[f] = std::max(s.max[f], 0.0);
        }
    }
    return s;
}

double Scaler::scale_value(int feature, double v) const {
    if (feature < 0 || feature >= static_cast<int>(min.size())) return 0.0;
    const double lo = min[feature], hi = max[feature];
    if (lo == hi) return 0.0;
    return 2.0 * (v - lo) / (hi - lo) - 1.0;
}

SparseRow Scaler::apply_row(const SparseRow& row) const {
    SparseRow out;
    const int m = static_cast<int>(min.size());
    std::size_t pos = 0;
    for (int f = 0; f < m; ++f) {
        double v = 0.0;
        if (pos < row.size() && row[pos].index == f) {
            v = row[pos].value;
            ++pos;
        }
        double sv = scale_value(f, v);
        if (sv != 0.0) out.push_back({f, sv});
    }
    // features beyond the scaler's range pass through unscaled
    for (; pos < row.size(); ++pos)
        if (row[pos].index >= m && row[pos].value != 0.0) out.push_back(row[pos]);
    return out;
}

SparseDataset apply_scaler(const Scaler& s, const SparseDataset& ds) {
    SparseDataset out;
    out.n_features = ds.n_features;
    out.labels = ds.labels;
    out.rows.reserve(ds.n_rows());
    for (const auto& row : ds.rows) out.rows.push_back(s.apply_row(row));
    return out;
}

std::vector<BinaryProblem> ovo_decompose(const SparseDataset& ds) {
    const auto classes = ds.distinct_classes();
    if (classes.size() < 2)
        throw std::invalid_argument("ovo_decompose: need at least 2 classes, got " +
                                    std::to_string(classes.size()));
    std::vector<BinaryProblem> problems;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        for (std::size_t j = i + 1; j < classes.size(); ++j) {
            BinaryProblem p;
            p.class_a = classes[j];  // larger identifier -> target 1
            p.class_b = classes[i];
            for (std::size_t r = 0; r < ds.n_rows(); ++r) {
                if (ds.labels[r] == p.class_a) {
                    p.row_indices.push_back(r);
                    p.targets.push_back(1.0);
                } else if (ds.labels[r] == p.class_b) {
                    p.row_indices.push_back(r);
                    p.targets.push_back(0.0);
                }
            }
            problems.push_back(std::move(p));
        }
    }
    return problems;
}

namespace {

std::map<double, std::vector<std::size_t>> by_class(const SparseDataset& ds) {
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) groups[ds.labels[i]].push_back(i);
    return groups;
}

}  // namespace

std::vector<FoldSplit> kfold_split(const SparseDataset& ds, int k, std::uint32_t seed) {
    if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
    if (static_cast<std::size_t>(k) > ds.n_rows())
        throw std::invalid_argument("kfold_split: k exceeds number of rows");

    std::mt19937 rng(seed);
    auto groups = by_class(ds);
    bool stratify = true;
    for (const auto& [cls, idx] : groups) {
        if (idx.size() < static_cast<std::size_t>(k)) {
            stratify = false;
            break;
        }
    }
    if (!stratify)
        std::cerr << "warning: a class has fewer than " << k
                  << " members; folds are not stratified\n";

    std::vector<std::vector<std::size_t>> folds(k);
    if (stratify) {
        for (auto& [cls, idx] : groups) {
            std::shuffle(idx.begin(), idx.end(), rng);
            for (std::size_t i = 0; i < idx.size(); ++i) folds[i % k].push_back(idx[i]);
        }
    } else {
        std::vector<std::size_t> idx(ds.n_rows());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i = 0; i < idx.size(); ++i) folds[i % k].push_back(idx[i]);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());

    std::vector<FoldSplit> out(k);
    for (int f = 0; f < k; ++f) {
        out[f].validation = folds[f];
        for (int g = 0; g < k; ++g)
            if (g != f)
                out[f].train.insert(out[f].train.end(), folds[g].begin(), folds[g].end());
        std::sort(out[f].train.begin(), out[f].train.end());
    }
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
train_test_split(const SparseDataset& ds, double train_fraction, std::uint32_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_test_split: fraction must be in (0,1)");
    std::mt19937 rng(seed);
    std::vector<std::size_t> train, test;
    auto groups = by_class(ds);
    for (auto& [cls, idx] : groups) {
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_train = static_cast<std::size_t>(std::lround(train_fraction * idx.size()));
        n_train = std::max<std::size_t>(n_train, 1);
        n_train = std::min(n_train, idx.size());
        train.insert(train.end(), idx.begin(), idx.begin() + n_train);
        test.insert(test.end(), idx.begin() + n_train, idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

}  // namespace dqnsbl
