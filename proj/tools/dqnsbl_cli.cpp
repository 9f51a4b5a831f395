// dqnsbl command-line tool: train, predict, cv-grid, feature-select.
//
// Every command writes a manifest.json describing the resolved run next
// to its outputs. Output files contain no wall-clock timings, so two
// runs of the same manifest are byte-identical; timings go to stdout.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dqnsbl/ard.hpp"
#include "dqnsbl/metrics.hpp"
#include "dqnsbl/model.hpp"
#include "dqnsbl/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dqnsbl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitArgs = 3;
constexpr int kExitNoConverge = 4;
constexpr int kExitOracleGuard = 5;
constexpr int kExitIllConditioned = 6;

struct Options {
    std::string command;
    std::string data_path;
    std::string model_path;
    std::string map_name = "linear";
    std::string engine_name = "dqn";
    std::string out_dir = ".";
    std::string trace_path;
    std::vector<double> sigma_grid;
    std::vector<int> hidden_grid;
    std::string hidden_preset = "small";
    std::vector<unsigned> seeds;
    int folds = 5;
    double sigma = 1.0;
    int hidden = 100;
    unsigned seed = 1;
    unsigned cv_seed = 42;
    double test_fraction = 0.25;
    bool no_scale = false;

    double alpha_max = 1e6;
    double delta_logalpha = 1e-3;
    double c = 1e-4;
    double init_alpha = 1e-2;
    int max_its = 100;
    int qn_max_its = 100;
    double qn_eps = 1e-1;
};

SblConfig make_sbl_config(const Options& o) {
    SblConfig cfg;
    cfg.max_outer_its = o.max_its;
    cfg.alpha_max = o.alpha_max;
    cfg.delta_logalpha = o.delta_logalpha;
    cfg.c = o.c;
    cfg.init_alpha = o.init_alpha;
    cfg.inner.max_iterations = o.qn_max_its;
    cfg.inner.grad_tolerance = o.qn_eps;
    return cfg;
}

std::vector<double> default_sigma_grid() {
    std::vector<double> g;
    for (int e = -5; e <= 5; ++e) g.push_back(std::ldexp(1.0, e));
    return g;
}

std::vector<int> preset_hidden_grid(const std::string& name) {
    if (name == "small") return {50, 100, 150, 200};
    if (name == "large") return {100, 500, 900, 1300};
    throw std::invalid_argument("unknown hidden preset: " + name);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

json sbl_config_json(const SblConfig& cfg) {
    json j;
    j["max_its"] = cfg.max_outer_its;
    j["alpha_max"] = cfg.alpha_max;
    j["delta_logalpha"] = cfg.delta_logalpha;
    j["c"] = cfg.c;
    j["init_alpha"] = cfg.init_alpha;
    j["qn_max_its"] = cfg.inner.max_iterations;
    j["qn_eps"] = cfg.inner.grad_tolerance;
    return j;
}

json manifest_json(const Options& o) {
    json j;
    j["command"] = o.command;
    j["data"] = o.data_path;
    if (!o.model_path.empty()) j["model"] = o.model_path;
    j["map"] = o.map_name;
    j["engine"] = o.engine_name;
    j["scale"] = !o.no_scale;
    j["folds"] = o.folds;
    j["cv_seed"] = o.cv_seed;
    if (o.command == "cv-grid") {
        if (o.map_name == "rvm") j["sigma_grid"] = o.sigma_grid;
        if (o.map_name == "sbelm") {
            j["hidden_grid"] = o.hidden_grid;
            j["seeds"] = o.seeds;
        }
    } else {
        if (o.map_name == "rvm") j["sigma"] = o.sigma;
        if (o.map_name == "sbelm") {
            j["hidden"] = o.hidden;
            j["seed"] = o.seed;
        }
    }
    if (o.command == "feature-select") {
        j["seed"] = o.seed;
        j["test_fraction"] = o.test_fraction;
    }
    j["config"] = sbl_config_json(make_sbl_config(o));
    j["out"] = o.out_dir;
    return j;
}

json metrics_json(const MetricsRecord& rec) {
    json j;
    j["cell"] = rec.cell;
    if (rec.failed) {
        j["failed"] = true;
        j["error"] = rec.error;
        return j;
    }
    j["fold_accuracy"] = rec.fold_accuracy;
    j["mean_accuracy"] = rec.mean_accuracy;
    j["std_accuracy"] = rec.std_accuracy;
    j["mean_bases"] = rec.mean_bases;
    j["n_pair_models"] = rec.n_pair_models;
    j["mean_outer_iterations"] = rec.mean_outer_iterations;
    return j;
}

FeatureMap make_map(const Options& o, int n_features, double sigma, int hidden,
                    unsigned seed) {
    const MapKind kind = map_kind_from_name(o.map_name);
    if (kind == MapKind::linear) return linear_map(n_features);
    if (kind == MapKind::rvm_kernel) return rvm_map({}, sigma, n_features);
    return sbelm_map(hidden, seed, n_features);
}

// Cross-validate one hyperparameter cell over shared fold assignments.
MetricsRecord evaluate_cell(const SparseDataset& ds, const std::vector<FoldSplit>& folds,
                            const FeatureMap& map_template, const TrainOptions& opt,
                            const std::string& cell_name, bool capture_errors) {
    MetricsRecord rec;
    rec.cell = cell_name;
    double bases = 0.0, iters = 0.0;
    int n_models = 0;
    try {
        for (const auto& fold : folds) {
            SparseDataset tr = ds.subset(fold.train);
            std::vector<FitReport> reports;
            OvoEnsemble ens = train_ovo(tr, map_template, opt, &reports);
            rec.fold_accuracy.push_back(accuracy(ens, ds, &fold.validation));
            for (const auto& m : ens.models) bases += static_cast<double>(m.n_bases());
            for (const auto& r : reports) iters += r.outer_iterations;
            n_models += static_cast<int>(ens.models.size());
            rec.n_pair_models = static_cast<int>(ens.models.size());
        }
        rec.mean_bases = n_models ? bases / n_models : 0.0;
        rec.mean_outer_iterations = n_models ? iters / n_models : 0.0;
        finalize_stats(rec);
    } catch (const std::exception& e) {
        if (!capture_errors) throw;
        rec.failed = true;
        rec.error = e.what();
    }
    return rec;
}

void print_record(const MetricsRecord& rec) {
    if (rec.failed) {
        std::printf("%-24s  %s\n", rec.cell.c_str(), ("FAILED: " + rec.error).c_str());
        return;
    }
    std::printf("%-24s  acc %6.2f +- %5.2f  bases %6.2f  iters %6.1f  %7.2fs\n",
                rec.cell.c_str(), rec.mean_accuracy, rec.std_accuracy, rec.mean_bases,
                rec.mean_outer_iterations, rec.wall_seconds);
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

int cmd_train(const Options& o) {
    SparseDataset ds = load_libsvm_file(o.data_path);
    fs::create_directories(o.out_dir);

    TrainOptions opt;
    opt.engine = engine_from_name(o.engine_name);
    opt.sbl = make_sbl_config(o);
    opt.scale = !o.no_scale;

    FeatureMap map = make_map(o, ds.n_features, o.sigma, o.hidden, o.seed);

    // CV metrics over shared folds, then the final model on all rows
    const double t0 = now_seconds();
    auto folds = kfold_split(ds, o.folds, o.cv_seed);
    std::string cell = o.map_name;
    if (o.map_name == "rvm") cell += " sigma=" + std::to_string(o.sigma);
    if (o.map_name == "sbelm")
        cell += " L=" + std::to_string(o.hidden) + " seed=" + std::to_string(o.seed);
    MetricsRecord rec = evaluate_cell(ds, folds, map, opt, cell, /*capture_errors=*/false);

    std::ofstream trace_out;
    std::size_t trace_pair = 0;
    if (!o.trace_path.empty()) {
        trace_out.open(o.trace_path, std::ios::binary);
        if (!trace_out) throw std::runtime_error("cannot write " + o.trace_path);
        trace_out << "pair,iteration,objective,grad_norm,step\n";
        trace_out.precision(17);
        opt.trace = [&](const DqnTraceRecord& r) {
            trace_out << trace_pair << ',' << r.iteration << ',' << r.objective << ','
                      << r.grad_norm << ',' << r.step << '\n';
        };
    }

    std::vector<FitReport> reports;
    auto problems = ovo_decompose(ds);
    OvoEnsemble ens;
    ens.classes = ds.distinct_classes();
    for (std::size_t i = 0; i < problems.size(); ++i) {
        trace_pair = i;
        FitReport rep;
        ens.models.push_back(train_binary(ds, problems[i], map, opt, &rep));
        reports.push_back(rep);
    }
    rec.wall_seconds = now_seconds() - t0;

    save_model(ens, (fs::path(o.out_dir) / "model.json").string());
    write_text(fs::path(o.out_dir) / "metrics.json", metrics_json(rec).dump(2) + "\n");
    write_text(fs::path(o.out_dir) / "manifest.json", manifest_json(o).dump(2) + "\n");

    print_record(rec);
    std::printf("train accuracy %.2f, model written to %s\n", accuracy(ens, ds),
                (fs::path(o.out_dir) / "model.json").string().c_str());

    for (const auto& r : reports)
        if (!r.converged && !r.bias_rescued) {
            std::cerr << "warning: a subproblem hit the outer-iteration cap without "
                         "meeting the log-alpha tolerance\n";
            return kExitNoConverge;
        }
    return kExitOk;
}

int cmd_cv_grid(const Options& o) {
    SparseDataset ds = load_libsvm_file(o.data_path);
    fs::create_directories(o.out_dir);

    TrainOptions opt;
    opt.engine = engine_from_name(o.engine_name);
    opt.sbl = make_sbl_config(o);
    opt.scale = !o.no_scale;

    struct Cell {
        std::string name;
        double sigma = 1.0;
        int hidden = 0;
        unsigned seed = 0;
    };
    std::vector<Cell> cells;
    const MapKind kind = map_kind_from_name(o.map_name);
    if (kind == MapKind::rvm_kernel) {
        for (double s : o.sigma_grid) {
            std::ostringstream name;
            name << "rvm sigma=" << s;
            cells.push_back({name.str(), s, 0, 0});
        }
    } else if (kind == MapKind::sbelm_layer) {
        for (int h : o.hidden_grid)
            for (unsigned s : o.seeds) {
                std::ostringstream name;
                name << "sbelm L=" << h << " seed=" << s;
                cells.push_back({name.str(), 0.0, h, s});
            }
    } else {
        cells.push_back({"linear", 0.0, 0, 0});
    }
    if (cells.empty()) throw std::invalid_argument("empty hyperparameter grid");

    // shared fold assignments across all cells
    auto folds = kfold_split(ds, o.folds, o.cv_seed);

    const double t0 = now_seconds();
    std::vector<MetricsRecord> records(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double c0 = now_seconds();
        FeatureMap map = make_map(o, ds.n_features, cells[i].sigma, cells[i].hidden,
                                  cells[i].seed);
        records[i] = evaluate_cell(ds, folds, map, opt, cells[i].name,
                                   /*capture_errors=*/true);
        records[i].wall_seconds = now_seconds() - c0;
    }

    // gathered by cell index: output order is independent of scheduling
    int best = -1;
    for (std::size_t i = 0; i < records.size(); ++i) {
        print_record(records[i]);
        if (!records[i].failed &&
            (best < 0 || records[i].mean_accuracy > records[best].mean_accuracy))
            best = static_cast<int>(i);
    }
    if (best < 0) throw std::runtime_error("every grid cell failed");

    json grid = json::array();
    for (const auto& r : records) grid.push_back(metrics_json(r));
    json out;
    out["cells"] = std::move(grid);
    out["best"] = metrics_json(records[best]);
    write_text(fs::path(o.out_dir) / "grid.json", out.dump(2) + "\n");
    write_text(fs::path(o.out_dir) / "manifest.json", manifest_json(o).dump(2) + "\n");

    std::printf("best: %s (mean %.2f), grid table written to %s (total %.2fs)\n",
                records[best].cell.c_str(), records[best].mean_accuracy,
                (fs::path(o.out_dir) / "grid.json").string().c_str(),
                now_seconds() - t0);
    return kExitOk;
}

int cmd_feature_select(const Options& o) {
    if (o.map_name != "linear")
        throw std::invalid_argument("feature-select requires --map linear");
    SparseDataset ds = load_libsvm_file(o.data_path);
    fs::create_directories(o.out_dir);

    TrainOptions opt;
    opt.engine = engine_from_name(o.engine_name);
    opt.sbl = make_sbl_config(o);

    auto [train_idx, test_idx] = train_test_split(ds, 1.0 - o.test_fraction, o.seed);
    SparseDataset train = ds.subset(train_idx);
    SparseDataset test = ds.subset(test_idx);

    auto res = early_stopping_fit(train, o.folds, opt, o.cv_seed, &test);

    std::ostringstream curve;
    curve.precision(17);
    curve << "iteration,sparsity_ratio,validation_accuracy,test_accuracy\n";
    for (const auto& pt : res.curve)
        curve << pt.iteration << ',' << pt.sparsity_ratio << ',' << pt.validation_accuracy
              << ',' << pt.test_accuracy << '\n';
    write_text(fs::path(o.out_dir) / "curve.csv", curve.str());

    // surviving features (1-based ids, matching the data file), by |w|
    struct Feat {
        int id;
        double w;
    };
    std::vector<Feat> feats;
    for (std::size_t s = 0; s < res.model.active.size(); ++s)
        if (res.model.active[s] != 0) feats.push_back({res.model.active[s], res.model.w[s]});
    std::stable_sort(feats.begin(), feats.end(),
                     [](const Feat& a, const Feat& b) {
                         return std::fabs(a.w) > std::fabs(b.w);
                     });
    json sel;
    sel["best_iteration"] = res.best_iteration;
    json list = json::array();
    for (const auto& f : feats) list.push_back(json{{"feature", f.id}, {"weight", f.w}});
    sel["features"] = std::move(list);
    write_text(fs::path(o.out_dir) / "selected.json", sel.dump(2) + "\n");
    write_text(fs::path(o.out_dir) / "manifest.json", manifest_json(o).dump(2) + "\n");

    OvoEnsemble ens;
    ens.classes = {res.model.class_b, res.model.class_a};
    ens.models = {res.model};
    save_model(ens, (fs::path(o.out_dir) / "model.json").string());

    std::printf("best iteration %d, %zu features kept, test accuracy %.2f\n",
                res.best_iteration, feats.size(),
                res.curve.empty() ? 0.0 : res.curve.back().test_accuracy);
    return kExitOk;
}

int cmd_predict(const Options& o) {
    OvoEnsemble ens = load_model(o.model_path);
    SparseDataset ds = load_libsvm_file(o.data_path);

    const int model_features = ens.models.empty() ? 0 : ens.models[0].map.n_features;
    if (ds.n_features > model_features)
        throw std::invalid_argument(
            "dimension mismatch: model expects " + std::to_string(model_features) +
            " features, data has " + std::to_string(ds.n_features));

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!o.out_dir.empty() && o.out_dir != ".") {
        fs::create_directories(o.out_dir);
        file.open(fs::path(o.out_dir) / "predictions.csv", std::ios::binary);
        if (!file) throw std::runtime_error("cannot write predictions");
        out = &file;
    }
    out->precision(17);

    *out << "prediction";
    for (double c : ens.classes) *out << ",score_" << c;
    *out << '\n';
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const auto scores = ovo_scores(ens, ds.rows[i]);
        const double pred = ovo_predict(ens, ds.rows[i]);
        *out << pred;
        for (double s : scores) *out << ',' << s;
        *out << '\n';
        if (pred == ds.labels[i]) ++correct;
    }
    if (ds.n_rows() > 0)
        std::fprintf(stderr, "accuracy %.2f on %zu rows\n",
                     100.0 * static_cast<double>(correct) / static_cast<double>(ds.n_rows()),
                     ds.n_rows());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse Bayesian classification with a diagonal quasi-Newton MAP stage"};
    app.require_subcommand(1);

    Options o;

    auto add_common = [&](CLI::App* cmd, bool needs_data) {
        auto* d = cmd->add_option("--data", o.data_path, "LIBSVM data file");
        if (needs_data) d->required();
        cmd->add_option("--engine", o.engine_name, "dqn|classic")->default_val("dqn");
        cmd->add_option("--out", o.out_dir, "output directory")->default_val(".");
        cmd->add_option("--folds", o.folds, "CV folds")->default_val(5);
        cmd->add_option("--cv-seed", o.cv_seed, "fold-assignment seed")->default_val(42);
        cmd->add_option("--alpha-max", o.alpha_max)->default_val(1e6);
        cmd->add_option("--delta-logalpha", o.delta_logalpha)->default_val(1e-3);
        cmd->add_option("--c", o.c, "fallback constant")->default_val(1e-4);
        cmd->add_option("--init-alpha", o.init_alpha)->default_val(1e-2);
        cmd->add_option("--max-its", o.max_its, "outer iteration cap")->default_val(100);
        cmd->add_option("--qn-max-its", o.qn_max_its, "MAP-stage iteration cap")
            ->default_val(100);
        cmd->add_option("--qn-eps", o.qn_eps, "MAP-stage gradient tolerance")
            ->default_val(1e-1);
        cmd->add_flag("--no-scale", o.no_scale, "skip per-problem [-1,1] scaling");
    };

    auto* train = app.add_subcommand("train", "fit a model; write model/metrics/manifest");
    add_common(train, true);
    train->add_option("--map", o.map_name, "linear|rvm|sbelm")->default_val("linear");
    train->add_option("--sigma", o.sigma, "rvm kernel width")->default_val(1.0);
    train->add_option("--hidden", o.hidden, "sbelm hidden nodes")->default_val(100);
    train->add_option("--seed", o.seed, "sbelm layer seed")->default_val(1);
    train->add_option("--trace", o.trace_path, "per-iteration optimizer trace CSV");

    auto* grid = app.add_subcommand("cv-grid", "cross-validate a hyperparameter grid");
    add_common(grid, true);
    grid->add_option("--map", o.map_name, "linear|rvm|sbelm")->default_val("linear");
    grid->add_option("--sigma-grid", o.sigma_grid, "rvm kernel widths (default 2^-5..2^5)");
    grid->add_option("--hidden-grid", o.hidden_grid, "sbelm hidden-node counts");
    grid->add_option("--hidden-preset", o.hidden_preset, "small|large")
        ->default_val("small");
    grid->add_option("--seeds", o.seeds, "sbelm layer seeds (default 1..5)");

    auto* fsel = app.add_subcommand("feature-select",
                                    "early-stopping CV feature selection (linear)");
    add_common(fsel, true);
    fsel->add_option("--map", o.map_name, "must be linear")->default_val("linear");
    fsel->add_option("--seed", o.seed, "train/test split seed")->default_val(1);
    fsel->add_option("--test-fraction", o.test_fraction)->default_val(0.25);

    auto* pred = app.add_subcommand("predict", "predict with a saved model");
    add_common(pred, true);
    pred->add_option("--model", o.model_path, "model file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitArgs;
    }

    if (o.sigma_grid.empty()) o.sigma_grid = default_sigma_grid();
    if (o.seeds.empty()) o.seeds = {1, 2, 3, 4, 5};

    try {
        if (o.hidden_grid.empty()) o.hidden_grid = preset_hidden_grid(o.hidden_preset);
        if (train->parsed()) {
            o.command = "train";
            return cmd_train(o);
        }
        if (grid->parsed()) {
            o.command = "cv-grid";
            return cmd_cv_grid(o);
        }
        if (fsel->parsed()) {
            o.command = "feature-select";
            return cmd_feature_select(o);
        }
        o.command = "predict";
        return cmd_predict(o);
    } catch (const ParseError& e) {
        std::cerr << "parse error in " << o.data_path << ": " << e.what() << "\n";
        return kExitParse;
    } catch (const OracleGuardError& e) {
        std::cerr << "oracle guard: " << e.what() << "\n";
        return kExitOracleGuard;
    } catch (const IllConditionedError& e) {
        std::cerr << "ill-conditioned: " << e.what() << "\n";
        return kExitIllConditioned;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return kExitArgs;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArgs;
    }
    return kExitOk;
}
