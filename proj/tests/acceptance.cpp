// Acceptance suite: ten end-to-end criteria with pinned tolerances.
// Prints one [PASS]/[FAIL] line per criterion; exit code is the number
// of failures.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dqnsbl/ard.hpp"
#include "dqnsbl/metrics.hpp"
#include "dqnsbl/model.hpp"
#include "dqnsbl/synth.hpp"

namespace fs = std::filesystem;
using namespace dqnsbl;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double elapsed) {
    std::printf("[%s] %2d. %-38s %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str(), elapsed);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << v;
    return ss.str();
}

SparseDataset load_bundled(const std::string& name) {
    return load_libsvm_file(std::string(DQNSBL_DATA_DIR) + "/" + name);
}

// ---------------------------------------------------------------- 1
// Analytic gradient vs central finite differences.
void criterion_gradient() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(101);
    std::normal_distribution<double> gauss(0, 1);
    std::uniform_real_distribution<double> apos(0.05, 3.0);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 49, m = 1 + rng() % 20;
        std::vector<double> data(n * m);
        for (auto& v : data) v = gauss(rng);
        std::vector<double> targets(n);
        for (auto& t : targets) t = rng() % 2;
        std::vector<double> alpha(m + 1), w(m + 1);
        for (auto& a : alpha) a = apos(rng);
        for (auto& v : w) v = gauss(rng);

        auto d = DesignMatrix::dense(data, n, m);
        MapObjective obj{&d, &targets, alpha};
        auto g = obj.gradient(w);
        for (std::size_t k = 0; k <= m; ++k) {
            auto wp = w, wm = w;
            wp[k] += h;
            wm[k] -= h;
            const double fd = (obj.value(wp) - obj.value(wm)) / (2 * h);
            worst = std::max(worst, std::fabs(g[k] - fd) / std::max(1.0, std::fabs(fd)));
        }
    }
    const double el = seconds_since(t0);
    report(1, "gradient vs finite differences", worst < 1e-5 && el < 5.0,
           "max rel err " + fmt(worst) + " (tol 1e-5)", el);
}

// ---------------------------------------------------------------- 2
// diag_bfgs_update vs an independent scalar evaluation of the update.
void criterion_diag_update() {
    const auto t0 = std::chrono::steady_clock::now();
    DqnConfig cfg;
    std::mt19937 rng(102);
    std::normal_distribution<double> gauss(0, 1);
    std::uniform_real_distribution<double> bgen(0.5, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + trial % 5;
        std::vector<double> b(dim), d(dim), g(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            b[k] = bgen(rng);
            d[k] = gauss(rng);
            g[k] = d[k] + 0.1 * gauss(rng);
        }
        auto out = diag_bfgs_update(b, d, g, cfg);

        double gd = 0.0, s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            gd += g[k] * d[k];
            s += d[k] * d[k] / b[k];
        }
        for (std::size_t k = 0; k < dim; ++k) {
            double expect;
            if (gd <= cfg.curvature_floor) {
                expect = b[k];
            } else {
                expect = 1.0 / (1.0 / b[k] + g[k] * g[k] / gd -
                                d[k] * d[k] / (b[k] * b[k] * s));
                if (!std::isfinite(expect) || expect <= 0.0) expect = b[k];
                expect = std::clamp(expect, cfg.diag_clamp_low, cfg.diag_clamp_high);
            }
            worst = std::max(worst,
                             std::fabs(out[k] - expect) / std::max(1.0, std::fabs(expect)));
        }
    }
    // safeguard: orthogonal delta/gamma leaves b unchanged
    const std::vector<double> b0{0.4, 2.5};
    const bool safeguard = diag_bfgs_update(b0, {1, 0}, {0, 1}, cfg) == b0;
    const double el = seconds_since(t0);
    report(2, "diagonal update scalar oracle", worst < 1e-12 && safeguard && el < 1.0,
           "max rel err " + fmt(worst) + " (tol 1e-12), safeguard " +
               (safeguard ? "ok" : "BROKEN"),
           el);
}

// ---------------------------------------------------------------- 3
// Positive-definite Hessian quadratic forms and convexity of L.
void criterion_convexity() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(103);
    std::normal_distribution<double> gauss(0, 1);
    std::uniform_real_distribution<double> apos(0.05, 3.0);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    bool pd_ok = true, convex_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng() % 40, m = 1 + rng() % 15;
        std::vector<double> data(n * m);
        for (auto& v : data) v = gauss(rng);
        std::vector<double> targets(n);
        for (auto& t : targets) t = rng() % 2;
        std::vector<double> alpha(m + 1), w(m + 1);
        for (auto& a : alpha) a = apos(rng);
        for (auto& v : w) v = gauss(rng);

        auto d = DesignMatrix::dense(data, n, m);
        MapObjective obj{&d, &targets, alpha};
        const std::size_t dim = m + 1;
        auto H = obj.hessian(w);
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> v(dim);
            for (auto& x : v) x = gauss(rng);
            double q = 0.0;
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = 0; b < dim; ++b) q += v[a] * H[a * dim + b] * v[b];
            if (!(q > 0.0)) pd_ok = false;
        }
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> w1(dim), w2(dim), wl(dim);
            for (std::size_t k = 0; k < dim; ++k) {
                w1[k] = gauss(rng);
                w2[k] = gauss(rng);
            }
            const double lam = unif(rng);
            for (std::size_t k = 0; k < dim; ++k) wl[k] = lam * w1[k] + (1 - lam) * w2[k];
            if (obj.value(wl) > lam * obj.value(w1) + (1 - lam) * obj.value(w2) + 1e-9)
                convex_ok = false;
        }
    }
    const double el = seconds_since(t0);
    report(3, "Hessian PD / objective convexity", pd_ok && convex_ok && el < 10.0,
           std::string("quadratic forms ") + (pd_ok ? "positive" : "NOT positive") +
               ", segments " + (convex_ok ? "convex" : "NOT convex") + " (tol 1e-9)",
           el);
}

// ---------------------------------------------------------------- 4
// Monotone MAP descent and clamped B on the bundled datasets.
void criterion_monotone() {
    const auto t0 = std::chrono::steady_clock::now();
    bool monotone = true, clamped = true;
    int stages = 0;
    DqnConfig ref_cfg;
    for (const std::string name : {"breast.libsvm", "diabetes.libsvm", "iris.libsvm"}) {
        SparseDataset raw = load_bundled(name);
        SparseDataset ds = apply_scaler(fit_scaler(raw), raw);
        ds.labels = raw.labels;
        for (const auto& problem : ovo_decompose(ds)) {
            SparseDataset sub = ds.subset(problem.row_indices);
            DesignMatrix design = DesignMatrix::linear(&sub.rows, sub.n_features);
            SblConfig cfg;
            double last = 0.0;
            dqn_sbl_fit(design, problem.targets, cfg,
                        [&](int, const ArdState& st) {
                            for (double b : st.diag_b)
                                if (b < ref_cfg.diag_clamp_low || b > ref_cfg.diag_clamp_high)
                                    clamped = false;
                            return true;
                        },
                        [&](const DqnTraceRecord& r) {
                            if (r.iteration == 0) ++stages;
                            else if (r.objective > last + 1e-9) monotone = false;
                            last = r.objective;
                        });
        }
    }
    const double el = seconds_since(t0);
    report(4, "monotone descent on bundled data", monotone && clamped,
           "objective non-increasing across " + std::to_string(stages) +
               " MAP stages, B within [1e-8, 1e8]: " + (clamped ? "yes" : "NO"),
           el);
}

double state_accuracy(const ArdState& state, int n_features,
                      const std::vector<SparseRow>& rows,
                      const std::vector<double>& targets) {
    BinaryModel m;
    m.map = linear_map(n_features);
    m.active = state.active;
    m.w = state.w;
    m.class_a = 1.0;
    m.class_b = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double pred = predict_proba(m, rows[i]) >= 0.5 ? 1.0 : 0.0;
        if (pred == targets[i]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(rows.size());
}

// ---------------------------------------------------------------- 5
// DQN engine vs the classical full-covariance oracle.
void criterion_oracle_agreement() {
    const auto t0 = std::chrono::steady_clock::now();
    const int n_train = 200, n_test = 100, m = 20, informative = 3;
    int ok_seeds = 0;
    double mean_diff = 0.0;
    for (std::uint32_t seed = 1; seed <= 10; ++seed) {
        auto gen = synth::known_support(n_train + n_test, m, informative, 500 + seed);
        std::vector<SparseRow> train_rows(gen.data.rows.begin(),
                                          gen.data.rows.begin() + n_train);
        std::vector<SparseRow> test_rows(gen.data.rows.begin() + n_train,
                                         gen.data.rows.end());
        std::vector<double> train_t(gen.data.labels.begin(),
                                    gen.data.labels.begin() + n_train);
        std::vector<double> test_t(gen.data.labels.begin() + n_train,
                                   gen.data.labels.end());

        SblConfig cfg;
        auto d1 = DesignMatrix::linear(&train_rows, m);
        auto [sd, rd] = dqn_sbl_fit(d1, train_t, cfg);
        auto d2 = DesignMatrix::linear(&train_rows, m);
        auto [sc, rc] = classic_sbl_fit(d2, train_t, cfg);

        const double acc_d = state_accuracy(sd, m, test_rows, test_t);
        const double acc_c = state_accuracy(sc, m, test_rows, test_t);
        const double diff = std::fabs(acc_d - acc_c);
        mean_diff += diff / 10.0;

        const double a = static_cast<double>(sd.active.size());
        const double b = static_cast<double>(sc.active.size());
        const bool sizes_ok = std::max(a, b) / std::min(a, b) <= 3.0;

        auto kept_support = [&](const ArdState& s) {
            std::vector<int> kept;
            for (int f : gen.support)
                if (std::find(s.active.begin(), s.active.end(), f + 1) != s.active.end())
                    kept.push_back(f);
            return kept;
        };
        const bool support_ok = kept_support(sd) == kept_support(sc);
        if (diff <= 2.0 && sizes_ok && support_ok) ++ok_seeds;
    }
    const double el = seconds_since(t0);
    report(5, "dqn vs classic oracle agreement", ok_seeds >= 8 && mean_diff <= 2.0 && el < 60.0,
           std::to_string(ok_seeds) + "/10 seeds agree, mean |acc diff| " +
               fmt(mean_diff, 2) + " pts (cap 2)",
           el);
}

struct CellScore {
    std::string name;
    double mean = 0.0;
    double bases = 0.0;
};

// 5-fold CV of one feature-map cell, returning mean accuracy and the
// mean surviving-basis count per pair model.
CellScore run_cell(const SparseDataset& ds, const FeatureMap& map, const std::string& name) {
    TrainOptions opt;
    CellScore score;
    score.name = name;
    auto folds = kfold_split(ds, 5, 42);
    double acc = 0.0, bases = 0.0;
    int n_models = 0;
    for (const auto& fold : folds) {
        SparseDataset tr = ds.subset(fold.train);
        OvoEnsemble ens = train_ovo(tr, map, opt);
        acc += accuracy(ens, ds, &fold.validation) / static_cast<double>(folds.size());
        for (const auto& mm : ens.models) {
            bases += static_cast<double>(mm.n_bases());
            ++n_models;
        }
    }
    score.mean = acc;
    score.bases = n_models ? bases / n_models : 0.0;
    return score;
}

CellScore g_best_breast, g_best_iris;

// ---------------------------------------------------------------- 6
// Desk-scale accuracy bands: breast RVM sigma grid, iris SBELM grid.
void criterion_accuracy_bands() {
    const auto t0 = std::chrono::steady_clock::now();

    SparseDataset breast = load_bundled("breast.libsvm");
    for (int e = -5; e <= 5; ++e) {
        const double sigma = std::ldexp(1.0, e);
        auto score = run_cell(breast, rvm_map({}, sigma, breast.n_features),
                              "sigma=" + fmt(sigma));
        if (score.mean > g_best_breast.mean) g_best_breast = score;
    }

    SparseDataset iris = load_bundled("iris.libsvm");
    for (int hidden : {50, 100, 150, 200}) {
        for (std::uint32_t seed = 1; seed <= 5; ++seed) {
            auto score = run_cell(iris, sbelm_map(hidden, seed, iris.n_features),
                                  "L=" + std::to_string(hidden) +
                                      " seed=" + std::to_string(seed));
            if (score.mean > g_best_iris.mean) g_best_iris = score;
        }
    }

    const double el = seconds_since(t0);
    const bool pass = g_best_breast.mean >= 94.0 && g_best_breast.mean <= 99.0 &&
                      g_best_iris.mean >= 93.0 && el < 900.0;
    report(6, "desk-scale accuracy bands", pass,
           "breast rvm best " + fmt(g_best_breast.mean, 4) + " (band [94,99], " +
               g_best_breast.name + "), iris sbelm best " + fmt(g_best_iris.mean, 4) +
               " (floor 93, " + g_best_iris.name + ")",
           el);
}

// ---------------------------------------------------------------- 7
// Sparsity: surviving bases at the best cells stay small.
void criterion_sparsity() {
    const auto t0 = std::chrono::steady_clock::now();
    const double el0 = seconds_since(t0);
    const bool have = !g_best_breast.name.empty() && !g_best_iris.name.empty();
    if (!have) {
        report(7, "surviving-basis sparsity", false, "skipped: criterion 6 did not run", el0);
        return;
    }
    const bool pass = g_best_breast.bases <= 15.0 && g_best_iris.bases <= 10.0;
    report(7, "surviving-basis sparsity", pass,
           "breast mean bases " + fmt(g_best_breast.bases, 3) + " (cap 15), iris " +
               fmt(g_best_iris.bases, 3) + " per pair (cap 10)",
           seconds_since(t0));
}

// ---------------------------------------------------------------- 8
// O(M) memory: M = 1e5 linear training completes with linear scratch;
// the classic engine refuses large active sets.
void criterion_memory() {
    const auto t0 = std::chrono::steady_clock::now();
    const int m = 100000;
    const std::size_t n = 2000;
    auto gen = synth::sparse_high_dim(n, m, 5, 20, 801);

    SblConfig cfg;
    cfg.max_outer_its = 15;
    auto design = DesignMatrix::linear(&gen.data.rows, m);
    auto [state, rep] = dqn_sbl_fit(design, gen.data.labels, cfg);

    // audited auxiliary memory: a fixed number of M- and N-length vectors
    const std::size_t budget = 16 * static_cast<std::size_t>(m + 1) + 10 * n;
    const bool linear_ok = rep.peak_scratch_doubles <= budget && !state.active.empty();

    bool guard_ok = false;
    try {
        auto d2 = DesignMatrix::linear(&gen.data.rows, m);
        classic_sbl_fit(d2, gen.data.labels, cfg);
    } catch (const OracleGuardError&) {
        guard_ok = true;
    }
    const double el = seconds_since(t0);
    report(8, "O(M) memory at M=1e5", linear_ok && guard_ok,
           "peak scratch " + std::to_string(rep.peak_scratch_doubles) + " doubles (budget " +
               std::to_string(budget) + "), classic guard " + (guard_ok ? "ok" : "MISSING"),
           el);
}

// ---------------------------------------------------------------- 9
// Feature-selection protocol on the synthetic high-dimensional corpus.
void criterion_feature_selection() {
    const auto t0 = std::chrono::steady_clock::now();
    auto gen = synth::sparse_high_dim(2000, 5000, 10, 30, 901);
    auto [train_idx, test_idx] = train_test_split(gen.data, 0.75, 1);
    SparseDataset train = gen.data.subset(train_idx);
    SparseDataset test = gen.data.subset(test_idx);

    TrainOptions opt;
    auto res = early_stopping_fit(train, 3, opt, 42, &test);

    bool monotone = true;
    for (std::size_t i = 1; i < res.curve.size(); ++i)
        if (res.curve[i].sparsity_ratio < res.curve[i - 1].sparsity_ratio - 1e-12)
            monotone = false;

    double densest_acc = 0.0, densest_ratio = 2.0, best_sparse_acc = -1.0;
    for (const auto& pt : res.curve) {
        if (pt.sparsity_ratio < densest_ratio) {
            densest_ratio = pt.sparsity_ratio;
            densest_acc = pt.test_accuracy;
        }
        if (pt.sparsity_ratio >= 0.9) best_sparse_acc = std::max(best_sparse_acc, pt.test_accuracy);
    }
    const bool acc_ok = best_sparse_acc >= 0.0 && best_sparse_acc >= densest_acc - 3.0;
    const double el = seconds_since(t0);
    report(9, "early-stopping feature selection", monotone && acc_ok && !res.curve.empty(),
           "curve monotone: " + std::string(monotone ? "yes" : "NO") + ", acc at ratio>=0.9 " +
               fmt(best_sparse_acc, 4) + " vs densest " + fmt(densest_acc, 4) + " (gap cap 3)",
           el);
}

// ---------------------------------------------------------------- 10
// Byte-identical outputs from two runs of the same manifest.
int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + DQNSBL_CLI_PATH + "\" " + args + " > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = fs::temp_directory_path() / "dqnsbl_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const std::string data = std::string(DQNSBL_DATA_DIR) + "/iris.libsvm";
    const std::string args =
        "train --data \"" + data + "\" --map linear --out \"" + dir.string() + "\"";

    const int rc1 = run_cli(args);
    const std::string model1 = slurp(dir / "model.json");
    const std::string metrics1 = slurp(dir / "metrics.json");
    const std::string manifest1 = slurp(dir / "manifest.json");

    const int rc2 = run_cli(args);
    const std::string model2 = slurp(dir / "model.json");
    const std::string metrics2 = slurp(dir / "metrics.json");
    const std::string manifest2 = slurp(dir / "manifest.json");

    const bool ran = rc1 >= 0 && rc1 == rc2 && !model1.empty() && !metrics1.empty();
    const bool identical = model1 == model2 && metrics1 == metrics2 && manifest1 == manifest2;
    fs::remove_all(dir);
    const double el = seconds_since(t0);
    report(10, "byte-identical repeated runs", ran && identical,
           std::string("model/metrics/manifest ") + (identical ? "identical" : "DIFFER") +
               ", exit " + std::to_string(rc1),
           el);
}

}  // namespace

int main() {
    criterion_gradient();
    criterion_diag_update();
    criterion_convexity();
    criterion_monotone();
    criterion_oracle_agreement();
    criterion_accuracy_bands();
    criterion_sparsity();
    criterion_memory();
    criterion_feature_selection();
    criterion_determinism();
    std::printf("%d/10 criteria passed\n", 10 - g_failures);
    return g_failures;
}
