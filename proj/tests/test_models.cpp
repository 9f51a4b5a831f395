#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "dqnsbl/metrics.hpp"
#include "dqnsbl/model.hpp"
#include "dqnsbl/synth.hpp"

using namespace dqnsbl;

TEST_CASE("name round trips") {
    CHECK(map_kind_from_name("linear") == MapKind::linear);
    CHECK(map_kind_from_name("rvm") == MapKind::rvm_kernel);
    CHECK(map_kind_from_name("sbelm") == MapKind::sbelm_layer);
    CHECK(map_kind_name(MapKind::rvm_kernel) == std::string("rvm"));
    CHECK_THROWS_AS(map_kind_from_name("nope"), std::invalid_argument);

    CHECK(engine_from_name("dqn") == Engine::dqn);
    CHECK(engine_from_name("classic") == Engine::classic);
    CHECK(engine_name(Engine::classic) == std::string("classic"));
    CHECK_THROWS_AS(engine_from_name("x"), std::invalid_argument);
}

TEST_CASE("sparse squared distance") {
    SparseRow a{{0, 1.0}, {2, 2.0}};
    SparseRow b{{1, -1.0}, {2, 3.0}};
    // dense: (1-0)^2 + (0-(-1))^2 + (2-3)^2 = 3
    CHECK(sparse_sq_distance(a, b) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(sparse_sq_distance(b, a) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(sparse_sq_distance(a, a) == 0.0);
    CHECK(sparse_sq_distance({}, a) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("gaussian kernel map") {
    std::vector<SparseRow> refs{{{0, 1.0}}, {{0, 3.0}}};
    const double sigma = 2.0;
    SparseRow x{{0, 1.0}};
    auto phi = gaussian_kernel_map(refs, x, sigma);
    REQUIRE(phi.size() == 2);
    CHECK(phi[0] == 1.0);  // zero distance
    CHECK(phi[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));  // d^2 = sigma^2
}

TEST_CASE("random layer is deterministic and bounded") {
    auto layer = make_random_layer(16, 42, 5);
    CHECK(layer.synapses.size() == 16 * 5);
    CHECK(layer.biases.size() == 16);
    for (double v : layer.synapses) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    auto again = make_random_layer(16, 42, 5);
    CHECK(layer.synapses == again.synapses);
    CHECK(layer.biases == again.biases);
    auto other = make_random_layer(16, 43, 5);
    CHECK(layer.synapses != other.synapses);

    // zero weights and bias give sigmoid(0) = 0.5
    RandomLayer zero;
    zero.hidden = 3;
    zero.input_dim = 2;
    zero.synapses.assign(6, 0.0);
    zero.biases.assign(3, 0.0);
    auto act = random_layer_map(zero, {{0, 4.0}, {1, -2.0}});
    for (double v : act) CHECK(v == 0.5);
}

TEST_CASE("map_row in linear mode densifies the sparse row") {
    auto map = linear_map(4);
    auto v = map_row(map, {{1, 2.5}, {3, -1.0}});
    CHECK(v == std::vector<double>{0.0, 2.5, 0.0, -1.0});
}

TEST_CASE("predict_proba of a bias-only zero model is 0.5") {
    BinaryModel m;
    m.map = linear_map(3);
    m.active = {0};
    m.w = {0.0};
    CHECK(predict_proba(m, {{0, 1.0}}) == 0.5);
}

TEST_CASE("train_binary separates two clusters") {
    auto ds = synth::clusters(60, 2, 3, 3.0, 11);
    auto problems = ovo_decompose(ds);
    REQUIRE(problems.size() == 1);
    TrainOptions opt;
    FitReport report;
    auto model = train_binary(ds, problems[0], linear_map(3), opt, &report);
    CHECK(model.class_a == 2.0);
    CHECK(model.class_b == 1.0);
    CHECK(report.outer_iterations >= 1);

    int correct = 0;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const double p = predict_proba(model, ds.rows[i]);
        const double pred = p >= 0.5 ? model.class_a : model.class_b;
        if (pred == ds.labels[i]) ++correct;
    }
    CHECK(correct >= 114);  // >= 95% on well-separated clusters
}

TEST_CASE("rvm training keeps only surviving references") {
    auto ds = synth::clusters(40, 2, 2, 3.0, 12);
    auto problems = ovo_decompose(ds);
    TrainOptions opt;
    auto scaled_refs_template = rvm_map({}, 4.0, 2);  // references filled in training
    auto model = train_binary(ds, problems[0], scaled_refs_template, opt);
    CHECK(model.map.kind == MapKind::rvm_kernel);
    // non-bias active columns map 1:1 onto stored references
    std::size_t non_bias = 0;
    for (int c : model.active)
        if (c != 0) ++non_bias;
    CHECK(model.map.references.size() == non_bias);
    CHECK(model.map.references.size() < 80);  // pruning happened
}

TEST_CASE("ovo on two classes matches the binary threshold") {
    auto ds = synth::clusters(50, 2, 3, 3.0, 13);
    TrainOptions opt;
    auto ens = train_ovo(ds, linear_map(3), opt);
    REQUIRE(ens.models.size() == 1);
    REQUIRE(ens.classes == std::vector<double>{1.0, 2.0});
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const double p = predict_proba(ens.models[0], ds.rows[i]);
        const double expect = p >= 0.5 ? ens.models[0].class_a : ens.models[0].class_b;
        CHECK(ovo_predict(ens, ds.rows[i]) == expect);
    }
}

TEST_CASE("ovo scores sum to pair count and ties keep the smaller class") {
    auto ds = synth::clusters(30, 3, 3, 3.0, 14);
    TrainOptions opt;
    auto ens = train_ovo(ds, linear_map(3), opt);
    REQUIRE(ens.models.size() == 3);
    auto scores = ovo_scores(ens, ds.rows[0]);
    double total = 0.0;
    for (double s : scores) total += s;
    CHECK(total == doctest::Approx(3.0).epsilon(1e-9));

    // tie handling: force two identical bias-only models
    OvoEnsemble tie;
    tie.classes = {1.0, 2.0};
    BinaryModel flat;
    flat.map = linear_map(1);
    flat.active = {0};
    flat.w = {0.0};
    flat.class_a = 2.0;
    flat.class_b = 1.0;
    tie.models = {flat};
    CHECK(ovo_predict(tie, {{0, 1.0}}) == 1.0);  // equal mass -> smaller id
}

TEST_CASE("three well-separated clusters classify perfectly") {
    auto ds = synth::clusters(40, 3, 4, 4.0, 15);
    TrainOptions opt;
    auto ens = train_ovo(ds, linear_map(4), opt);
    CHECK(accuracy(ens, ds) == 100.0);
}

TEST_CASE("lr_l2 baseline") {
    auto gen = synth::known_support(200, 5, 2, 21);
    DqnConfig cfg;
    cfg.grad_tolerance = 1e-4;
    cfg.max_iterations = 500;

    // heavy regularization drives weights toward zero
    auto d1 = DesignMatrix::linear(&gen.data.rows, 5);
    auto w_big = lr_l2_fit(d1, gen.data.labels, 1e6, cfg);
    for (double v : w_big) CHECK(std::fabs(v) < 1e-2);

    // light regularization recovers the signal direction
    auto d2 = DesignMatrix::linear(&gen.data.rows, 5);
    auto w_small = lr_l2_fit(d2, gen.data.labels, 1e-2, cfg);
    CHECK(w_small[1] > 0.5);   // true weight +3
    CHECK(w_small[2] < -0.5);  // true weight -3
}

TEST_CASE("serialization round trips byte-exactly") {
    auto ds = synth::clusters(30, 3, 3, 3.0, 16);
    TrainOptions opt;
    auto ens = train_ovo(ds, linear_map(3), opt);

    const std::string text = serialize_model(ens);
    auto back = deserialize_model(text);
    CHECK(serialize_model(back) == text);
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        CHECK(ovo_predict(back, ds.rows[i]) == ovo_predict(ens, ds.rows[i]));

    const std::string path = "test_model_roundtrip.json";
    save_model(ens, path);
    auto loaded = load_model(path);
    CHECK(serialize_model(loaded) == text);
    std::remove(path.c_str());

    CHECK_THROWS(deserialize_model("{\"format\":\"other\"}"));
    CHECK_THROWS(deserialize_model("not json"));
}

TEST_CASE("sbelm model serializes via (hidden, seed) and regenerates") {
    auto ds = synth::clusters(40, 2, 3, 3.0, 17);
    TrainOptions opt;
    auto ens = train_ovo(ds, sbelm_map(20, 99, 3), opt);
    const std::string text = serialize_model(ens);
    auto back = deserialize_model(text);
    CHECK(back.models[0].map.layer.synapses == ens.models[0].map.layer.synapses);
    for (std::size_t i = 0; i < ds.n_rows(); ++i)
        CHECK(predict_proba(back.models[0], ds.rows[i]) ==
              predict_proba(ens.models[0], ds.rows[i]));
}

TEST_CASE("early stopping produces a valid curve and model") {
    auto gen = synth::known_support(300, 30, 4, 25);
    TrainOptions opt;
    auto res = early_stopping_fit(gen.data, 4, opt, 7);

    CHECK(res.best_iteration >= 1);
    REQUIRE_FALSE(res.curve.empty());
    for (const auto& pt : res.curve) {
        CHECK(pt.sparsity_ratio >= 0.0);
        CHECK(pt.sparsity_ratio <= 1.0);
        CHECK(pt.validation_accuracy >= 0.0);
        CHECK(pt.validation_accuracy <= 100.0);
    }
    // best iteration is the earliest argmax of validation accuracy
    double best = -1.0;
    for (const auto& pt : res.curve) best = std::max(best, pt.validation_accuracy);
    for (const auto& pt : res.curve) {
        if (pt.iteration == res.best_iteration) CHECK(pt.validation_accuracy == best);
        if (pt.iteration < res.best_iteration) CHECK(pt.validation_accuracy < best);
    }

    // resulting model beats chance comfortably on its own training data
    int correct = 0;
    for (std::size_t i = 0; i < gen.data.n_rows(); ++i) {
        const double p = predict_proba(res.model, gen.data.rows[i]);
        const double pred = p >= 0.5 ? res.model.class_a : res.model.class_b;
        if (pred == gen.data.labels[i]) ++correct;
    }
    CHECK(correct >= 210);  // 70%
}

TEST_CASE("metrics finalize") {
    MetricsRecord rec;
    rec.fold_accuracy = {90.0, 100.0};
    finalize_stats(rec);
    CHECK(rec.mean_accuracy == doctest::Approx(95.0));
    CHECK(rec.std_accuracy == doctest::Approx(5.0));
}
