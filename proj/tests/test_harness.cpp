#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "hcrbm/harness.hpp"
#include "oracles.hpp"

using namespace hcrbm;
namespace fs = std::filesystem;

namespace {

TrainConfig tiny_cfg(Variant v) {
    TrainConfig cfg;
    cfg.variant = v;
    cfg.hidden = {5};
    cfg.lr = 0.2;
    cfg.epochs = 3;
    cfg.batch_size = 20;
    cfg.seed = 4;
    return cfg;
}

}  // namespace

TEST_CASE("run_training dispatches every variant and round trips through disk") {
    Dataset data = oracle::make_toy(3, 8, 20, 70);
    TaxonomyTree tree = parse_tree(
        "[edges]\nroot -> m\nm -> c0\nm -> c1\nroot -> c2\n"
        "[classes]\nc0 = 0\nc1 = 1\nc2 = 2\n");
    std::string path = (fs::temp_directory_path() / "hcrbm_harness_model").string();

    for (Variant v : {Variant::rbm, Variant::hrbm, Variant::mnl, Variant::corrmnl,
                      Variant::cascade_hard, Variant::cascade_soft, Variant::hhrbm}) {
        CAPTURE(to_string(v));
        TrainOutcome out = run_training(data, tree, tiny_cfg(v));
        CHECK(out.model.variant == v);
        CHECK(out.model.feature_count() == 8);
        CHECK(out.model.class_count() == 3);
        CHECK(out.metrics.epochs.size() == 3);
        CHECK(out.metrics.seconds > 0.0);

        fs::remove_all(path);
        save_model(path, out.model);
        LoadedModel back = load_model(path);
        CHECK(back.variant == v);
        for (int i = 0; i < 5; ++i) {
            Vector x = data.X.row(i).transpose();
            CHECK(back.predict(x) == out.model.predict(x));
            CHECK((back.scores(x) == out.model.scores(x)));
        }
    }
    fs::remove_all(path);
}

TEST_CASE("run_training refuses a tree variant without a tree") {
    Dataset data = oracle::make_toy(2, 6, 10, 71);
    CHECK_THROWS_WITH_AS(run_training(data, std::nullopt, tiny_cfg(Variant::hrbm)),
                         doctest::Contains("tree"), std::invalid_argument);
    CHECK_THROWS_AS(run_training(data, std::nullopt, tiny_cfg(Variant::cascade_soft)),
                    std::invalid_argument);
    // rbm and mnl run fine without one
    CHECK_NOTHROW(run_training(data, std::nullopt, tiny_cfg(Variant::rbm)));
    CHECK_NOTHROW(run_training(data, std::nullopt, tiny_cfg(Variant::mnl)));
}

TEST_CASE("config validation rejects bad settings") {
    Dataset data = oracle::make_toy(2, 6, 10, 72);
    TrainConfig cfg = tiny_cfg(Variant::rbm);
    cfg.epochs = 0;
    CHECK_THROWS_AS(run_training(data, std::nullopt, cfg), std::invalid_argument);
    cfg = tiny_cfg(Variant::rbm);
    cfg.lr = 0.0;
    CHECK_THROWS_AS(run_training(data, std::nullopt, cfg), std::invalid_argument);
    cfg = tiny_cfg(Variant::rbm);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(run_training(data, std::nullopt, cfg), std::invalid_argument);
    cfg = tiny_cfg(Variant::rbm);
    cfg.hidden.clear();
    CHECK_THROWS_AS(run_training(data, std::nullopt, cfg), std::invalid_argument);
}

TEST_CASE("evaluate reports the error rate and confusion matrix") {
    Dataset data = oracle::make_toy(3, 10, 40, 73, 0.02);
    TrainConfig cfg = tiny_cfg(Variant::mnl);
    cfg.epochs = 50;
    cfg.lr = 0.5;
    TrainOutcome out = run_training(data, std::nullopt, cfg);
    EvalResult r = evaluate(out.model, data);
    CHECK(r.error_rate < 0.1);
    CHECK(r.confusion.sum() == data.size());
    double diag = 0;
    for (int k = 0; k < 3; ++k) diag += r.confusion(k, k);
    CHECK(diag / data.size() == doctest::Approx(1.0 - r.error_rate));

    std::string csv = confusion_csv(r);
    CHECK(csv.find("true_class") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

    Dataset narrow = oracle::make_toy(3, 6, 5, 73);
    CHECK_THROWS_WITH_AS(evaluate(out.model, narrow), doctest::Contains("mismatch"),
                         std::invalid_argument);
}

TEST_CASE("metrics_json carries the config and epoch history") {
    TrainConfig cfg = tiny_cfg(Variant::hrbm);
    cfg.C = 0.25;
    RunMetrics metrics;
    metrics.epochs = {{1, 0.5, 0.1, 0.3}, {2, 0.4, 0.05, 0.2}};
    metrics.test_error = 0.125;
    metrics.seconds = 1.5;

    auto j = nlohmann::json::parse(metrics_json(cfg, metrics));
    CHECK(j["config"]["variant"] == "hrbm");
    CHECK(j["config"]["C"] == 0.25);
    CHECK(j["config"]["hidden"][0] == 5);
    CHECK(j["config"]["penalty"] == "abs");
    CHECK(j["config"]["seed"] == 4);
    CHECK(j["epochs"].size() == 2);
    CHECK(j["epochs"][1]["recon_error"] == 0.4);
    CHECK(j["test_error"] == 0.125);
    CHECK(j["seconds"] == 1.5);

    metrics.test_error.reset();
    auto j2 = nlohmann::json::parse(metrics_json(cfg, metrics));
    CHECK(j2["test_error"].is_null());
}

TEST_CASE("epoch_csv is stable and parseable") {
    RunMetrics metrics;
    metrics.epochs = {{1, 0.5, 0.0, 1.0 / 3.0}, {2, 0.25, 0.0, 0.25}};
    std::string csv = epoch_csv(metrics);
    CHECK(csv == "epoch,recon_error,penalty,train_error\n"
                 "1,0.5,0,0.3333333333\n"
                 "2,0.25,0,0.25\n");
}

TEST_CASE("gradcheck passes normally and fails when a block is flipped") {
    GradCheckReport ok = gradcheck(2, 2, 3, 5);
    CHECK(ok.pass);
    REQUIRE(ok.block_errors.size() == 5);
    for (const auto& [name, err] : ok.block_errors) {
        CAPTURE(name);
        CHECK(err < 1e-6);
    }
    REQUIRE(ok.penalty_errors.size() == 3);
    for (const auto& [name, err] : ok.penalty_errors) {
        CAPTURE(name);
        CHECK(err < 1e-8);
    }
    CHECK(ok.raw_child_term_error == 0.0);

    GradCheckReport bad = gradcheck(2, 2, 3, 5, "c");
    CHECK_FALSE(bad.pass);
    CHECK(bad.failed_block == "c");

    CHECK_THROWS_AS(gradcheck(5, 2, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(gradcheck(2, 2, 3, 5, "bogus"), std::invalid_argument);
}

TEST_CASE("unknown experiment names list the available protocols") {
    ExperimentOptions opt;
    CHECK_THROWS_WITH_AS(run_experiment("nope", opt), doctest::Contains("table1"),
                         std::invalid_argument);
    CHECK(experiment_names().size() == 4);
}

TEST_CASE("experiments report missing data with the path searched") {
    ExperimentOptions opt;
    opt.data_root = (fs::temp_directory_path() / "hcrbm_missing_data").string();
    fs::remove_all(opt.data_root);
    try {
        run_experiment("table1", opt);
        FAIL("expected a missing-data error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("mnist") != std::string::npos);
    }
}

TEST_CASE("load_model rejects unknown files") {
    std::string path = (fs::temp_directory_path() / "hcrbm_unknown.bin").string();
    std::ofstream(path) << "not a checkpoint";
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("unrecognized"), std::runtime_error);
    fs::remove(path);
    CHECK_THROWS_AS(load_model(path), std::runtime_error);
}
