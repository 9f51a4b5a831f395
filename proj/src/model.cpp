#include "dqnsbl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dqnsbl/kernels.hpp"
#include "dqnsbl/metrics.hpp"

namespace dqnsbl {

using json = nlohmann::ordered_json;

const char* engine_name(Engine e) { return e == Engine::dqn ? "dqn" : "classic"; }

Engine engine_from_name(const std::string& name) {
    if (name == "dqn") return Engine::dqn;
    if (name == "classic") return Engine::classic;
    throw std::invalid_argument("unknown engine: " + name);
}

double predict_proba(const BinaryModel& model, const SparseRow& x) {
    SparseRow scaled;
    const SparseRow* row = &x;
    if (model.scaler) {
        scaled = model.scaler->apply_row(x);
        row = &scaled;
    }

    double z = 0.0;
    if (model.map.kind == MapKind::linear) {
        // active is ascending; walk the sparse row against it
        auto it = model.active.begin();
        if (it != model.active.end() && *it == 0) {
            z += model.w[0];
            ++it;
        }
        for (const auto& e : *row) {
            const int col = e.index + 1;
            it = std::lower_bound(it, model.active.end(), col);
            if (it == model.active.end()) break;
            if (*it == col) z += model.w[it - model.active.begin()] * e.value;
        }
    } else {
        std::vector<double> phi = map_row(model.map, *row);
        for (std::size_t s = 0; s < model.active.size(); ++s) {
            const int col = model.active[s];
            z += model.w[s] * (col == 0 ? 1.0 : phi[col - 1]);
        }
    }
    return kernels::sigmoid(z);
}

std::vector<double> ovo_scores(const OvoEnsemble& ens, const SparseRow& x) {
    std::vector<double> scores(ens.classes.size(), 0.0);
    auto class_pos = [&](double c) {
        return std::lower_bound(ens.classes.begin(), ens.classes.end(), c) -
               ens.classes.begin();
    };
    for (const auto& m : ens.models) {
        const double p = predict_proba(m, x);
        scores[class_pos(m.class_a)] += p;
        scores[class_pos(m.class_b)] += 1.0 - p;
    }
    return scores;
}

double ovo_predict(const OvoEnsemble& ens, const SparseRow& x) {
    const auto scores = ovo_scores(ens, x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;  // ties keep the smaller class id
    return ens.classes[best];
}

BinaryModel train_binary(const SparseDataset& ds, const BinaryProblem& problem,
                         const FeatureMap& map_template, const TrainOptions& opt,
                         FitReport* report) {
    if (problem.row_indices.empty())
        throw std::invalid_argument("train_binary: empty problem");
    bool has0 = false, has1 = false;
    for (double t : problem.targets) (t > 0.5 ? has1 : has0) = true;
    if (!has0 || !has1)
        throw std::invalid_argument("train_binary: single-class problem");

    SparseDataset sub = ds.subset(problem.row_indices);

    BinaryModel model;
    model.class_a = problem.class_a;
    model.class_b = problem.class_b;

    std::vector<SparseRow> rows;
    if (opt.scale) {
        Scaler scaler = fit_scaler(sub);
        rows.reserve(sub.n_rows());
        for (const auto& r : sub.rows) rows.push_back(scaler.apply_row(r));
        model.scaler = std::move(scaler);
    } else {
        rows = sub.rows;
    }

    FeatureMap map = map_template;
    if (map.kind == MapKind::rvm_kernel) map.references = rows;

    DesignMatrix design = build_design(map, rows);
    auto [state, rep] =
        opt.engine == Engine::dqn
            ? dqn_sbl_fit(design, problem.targets, opt.sbl, nullptr, opt.trace)
            : classic_sbl_fit(design, problem.targets, opt.sbl);
    if (report) *report = rep;

    if (map.kind == MapKind::rvm_kernel) {
        // keep only the relevance vectors; remap columns to the compact set
        std::vector<SparseRow> kept;
        std::vector<int> active;
        for (int col : state.active) {
            if (col == 0) {
                active.push_back(0);
            } else {
                kept.push_back(std::move(map.references[col - 1]));
                active.push_back(static_cast<int>(kept.size()));
            }
        }
        map.references = std::move(kept);
        model.active = std::move(active);
    } else {
        model.active = state.active;
    }
    model.map = std::move(map);
    model.w = state.w;
    return model;
}

OvoEnsemble train_ovo(const SparseDataset& ds, const FeatureMap& map_template,
                      const TrainOptions& opt, std::vector<FitReport>* reports) {
    OvoEnsemble ens;
    ens.classes = ds.distinct_classes();
    auto problems = ovo_decompose(ds);
    ens.models.resize(problems.size());
    if (reports) reports->resize(problems.size());
    for (std::size_t i = 0; i < problems.size(); ++i) {
        FitReport rep;
        ens.models[i] = train_binary(ds, problems[i], map_template, opt, &rep);
        if (reports) (*reports)[i] = rep;
    }
    return ens;
}

std::vector<double> lr_l2_fit(DesignMatrix& design, const std::vector<double>& targets,
                              double lambda, const DqnConfig& cfg) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lr_l2_fit: lambda must be positive");
    MapObjective obj{&design, &targets, std::vector<double>(design.n_active(), lambda)};
    DqnResult r = dqn_minimize(obj, std::vector<double>(design.n_active(), 0.0), cfg);
    return r.w;
}

namespace {

// validation accuracy of a linear-mode active-set iterate
double linear_state_accuracy(const ArdState& state, const std::vector<SparseRow>& rows,
                             const std::vector<double>& targets) {
    double bias = 0.0;
    int max_col = 0;
    for (int c : state.active) max_col = std::max(max_col, c);
    std::vector<int> slot_of(max_col + 1, -1);
    for (std::size_t s = 0; s < state.active.size(); ++s)
        slot_of[state.active[s]] = static_cast<int>(s);
    if (slot_of[0] >= 0) bias = state.w[slot_of[0]];

    std::size_t correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double z = bias;
        for (const auto& e : rows[i]) {
            const int col = e.index + 1;
            if (col <= max_col && slot_of[col] >= 0) z += state.w[slot_of[col]] * e.value;
        }
        if ((z >= 0.0) == (targets[i] > 0.5)) ++correct;
    }
    return rows.empty() ? 0.0 : 100.0 * correct / rows.size();
}

}  // namespace

EarlyStoppingResult early_stopping_fit(const SparseDataset& train, int folds,
                                       const TrainOptions& opt, std::uint32_t seed,
                                       const SparseDataset* test) {
    auto classes = train.distinct_classes();
    if (classes.size() != 2)
        throw std::invalid_argument("early_stopping_fit: binary datasets only");
    const double class_a = classes[1], class_b = classes[0];
    auto target_of = [&](double label) { return label == class_a ? 1.0 : 0.0; };

    std::vector<double> full_targets(train.n_rows());
    for (std::size_t i = 0; i < train.n_rows(); ++i) full_targets[i] = target_of(train.labels[i]);

    const FeatureMap map = linear_map(train.n_features);

    // CV pass: validation accuracy after every outer iteration
    auto splits = kfold_split(train, folds, seed);
    std::vector<std::vector<double>> val_acc(splits.size());
    for (std::size_t f = 0; f < splits.size(); ++f) {
        SparseDataset tr = train.subset(splits[f].train);
        SparseDataset va = train.subset(splits[f].validation);
        std::vector<double> tr_t(tr.n_rows()), va_t(va.n_rows());
        for (std::size_t i = 0; i < tr.n_rows(); ++i) tr_t[i] = target_of(tr.labels[i]);
        for (std::size_t i = 0; i < va.n_rows(); ++i) va_t[i] = target_of(va.labels[i]);

        DesignMatrix design = build_design(map, tr.rows);
        auto record = [&](int, const ArdState& st) {
            val_acc[f].push_back(linear_state_accuracy(st, va.rows, va_t));
            return true;
        };
        if (opt.engine == Engine::dqn)
            dqn_sbl_fit(design, tr_t, opt.sbl, record);
        else
            classic_sbl_fit(design, tr_t, opt.sbl, record);
    }

    std::size_t n_iters = 0;
    for (const auto& v : val_acc) n_iters = std::max(n_iters, v.size());
    std::vector<double> mean_val(n_iters, 0.0);
    for (const auto& v : val_acc)
        for (std::size_t i = 0; i < n_iters; ++i)
            mean_val[i] += (i < v.size() ? v[i] : v.back()) / val_acc.size();

    int best_iter = 1;
    for (std::size_t i = 1; i < n_iters; ++i)
        if (mean_val[i] > mean_val[best_iter - 1]) best_iter = static_cast<int>(i) + 1;

    // retrain on the full set; snapshot at best_iter, keep recording the
    // sparsity/test curve to the end
    const double m_features = static_cast<double>(train.n_features);
    EarlyStoppingResult res;
    res.best_iteration = best_iter;
    std::vector<double> sparsity_hist, test_hist;
    ArdState snapshot;
    bool have_snapshot = false;

    DesignMatrix design = build_design(map, train.rows);
    std::vector<double> test_t;
    if (test) {
        test_t.resize(test->n_rows());
        for (std::size_t i = 0; i < test->n_rows(); ++i) test_t[i] = target_of(test->labels[i]);
    }
    auto record = [&](int iter, const ArdState& st) {
        std::size_t nonbias = st.active.size();
        if (!st.active.empty() && st.active[0] == 0) --nonbias;
        sparsity_hist.push_back(1.0 - static_cast<double>(nonbias) / m_features);
        test_hist.push_back(test ? linear_state_accuracy(st, test->rows, test_t)
                                 : std::nan(""));
        if (iter == best_iter) {
            snapshot = st;
            have_snapshot = true;
        }
        return true;
    };
    auto [state, rep] = opt.engine == Engine::dqn
                            ? dqn_sbl_fit(design, full_targets, opt.sbl, record)
                            : classic_sbl_fit(design, full_targets, opt.sbl, record);
    if (!have_snapshot) snapshot = state;  // converged before best_iter

    res.model.map = map;
    res.model.active = snapshot.active;
    res.model.w = snapshot.w;
    res.model.class_a = class_a;
    res.model.class_b = class_b;

    const std::size_t total = sparsity_hist.size();
    res.curve.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        EarlyStoppingCurvePoint pt;
        pt.iteration = static_cast<int>(i) + 1;
        pt.sparsity_ratio = sparsity_hist[i];
        pt.validation_accuracy = i < n_iters ? mean_val[i] : mean_val.back();
        pt.test_accuracy = test_hist[i];
        res.curve.push_back(pt);
    }
    return res;
}

namespace {

json row_to_json(const SparseRow& row) {
    json j = json::array();
    for (const auto& e : row) j.push_back(json::array({e.index, e.value}));
    return j;
}

SparseRow row_from_json(const json& j) {
    SparseRow row;
    for (const auto& e : j) row.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
    return row;
}

json model_to_json(const BinaryModel& m) {
    json j;
    j["map"]["kind"] = map_kind_name(m.map.kind);
    j["map"]["n_features"] = m.map.n_features;
    if (m.map.kind == MapKind::rvm_kernel) {
        j["map"]["sigma"] = m.map.sigma;
        json refs = json::array();
        for (const auto& r : m.map.references) refs.push_back(row_to_json(r));
        j["map"]["references"] = std::move(refs);
    } else if (m.map.kind == MapKind::sbelm_layer) {
        j["map"]["hidden"] = m.map.layer.hidden;
        j["map"]["seed"] = m.map.layer.seed;
    }
    if (m.scaler) {
        j["scaler"]["min"] = m.scaler->min;
        j["scaler"]["max"] = m.scaler->max;
    } else {
        j["scaler"] = nullptr;
    }
    j["active"] = m.active;
    j["w"] = m.w;
    j["class_a"] = m.class_a;
    j["class_b"] = m.class_b;
    return j;
}

BinaryModel model_from_json(const json& j) {
    BinaryModel m;
    const auto& jm = j.at("map");
    const MapKind kind = map_kind_from_name(jm.at("kind").get<std::string>());
    const int n_features = jm.at("n_features").get<int>();
    if (kind == MapKind::linear) {
        m.map = linear_map(n_features);
    } else if (kind == MapKind::rvm_kernel) {
        std::vector<SparseRow> refs;
        for (const auto& r : jm.at("references")) refs.push_back(row_from_json(r));
        m.map = rvm_map(std::move(refs), jm.at("sigma").get<double>(), n_features);
    } else {
        m.map = sbelm_map(jm.at("hidden").get<int>(), jm.at("seed").get<std::uint32_t>(),
                          n_features);
    }
    if (!j.at("scaler").is_null()) {
        Scaler s;
        s.min = j.at("scaler").at("min").get<std::vector<double>>();
        s.max = j.at("scaler").at("max").get<std::vector<double>>();
        m.scaler = std::move(s);
    }
    m.active = j.at("active").get<std::vector<int>>();
    m.w = j.at("w").get<std::vector<double>>();
    m.class_a = j.at("class_a").get<double>();
    m.class_b = j.at("class_b").get<double>();
    return m;
}

}  // namespace

std::string serialize_model(const OvoEnsemble& ens) {
    json j;
    j["format"] = "dqnsbl-model";
    j["version"] = 1;
    j["classes"] = ens.classes;
    json models = json::array();
    for (const auto& m : ens.models) models.push_back(model_to_json(m));
    j["models"] = std::move(models);
    return j.dump(2) + "\n";
}

OvoEnsemble deserialize_model(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format") != "dqnsbl-model" || j.at("version").get<int>() != 1)
        throw std::runtime_error("unsupported model document");
    OvoEnsemble ens;
    ens.classes = j.at("classes").get<std::vector<double>>();
    for (const auto& jm : j.at("models")) ens.models.push_back(model_from_json(jm));
    return ens;
}

void save_model(const OvoEnsemble& ens, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << serialize_model(ens);
}

OvoEnsemble load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

}  // namespace dqnsbl
