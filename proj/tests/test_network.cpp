#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "geospark/network.hpp"
#include "geospark/synthetic.hpp"

using namespace geospark;

namespace {

NetworkConfig tiny_config() {
    NetworkConfig cfg = NetworkConfig::preset("toy");
    cfg.stage_dims = {8, 12};
    cfg.depths = {1, 1};
    cfg.gd_caps = {0.5};
    cfg.k_local = 6;
    cfg.k_global = 3;
    cfg.k_sp = 3;
    cfg.epochs = 2;
    return cfg;
}

SceneInput tiny_scene(std::uint64_t seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.density = 8.0;
    NetworkConfig cfg = tiny_config();
    return preprocess_scene(generate_scene(spec).cloud, cfg);
}

std::string temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("config round-trips through its text form") {
    NetworkConfig cfg = NetworkConfig::preset("toy");
    cfg.lambda = 0.75;
    cfg.k_local = 5;
    NetworkConfig back = config_from_string(cfg.to_string());
    CHECK(back.to_string() == cfg.to_string());
}

TEST_CASE("config file parsing honors comments and rejects unknown keys") {
    auto path = std::filesystem::temp_directory_path() / "gs_cfg_test.cfg";
    {
        std::ofstream out(path);
        out << "# comment\nlambda = 1.25\nk_local = 9  # trailing comment\n\n";
    }
    NetworkConfig cfg = load_config(path.string());
    CHECK(cfg.lambda == doctest::Approx(1.25));
    CHECK(cfg.k_local == 9);
    {
        std::ofstream out(path);
        out << "bogus = 1\n";
    }
    CHECK_THROWS_AS(load_config(path.string()), ArgumentError);
    std::filesystem::remove(path);
}

TEST_CASE("config validation catches inconsistent stage settings") {
    NetworkConfig cfg = NetworkConfig::preset("toy");
    cfg.depths = {1};
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = NetworkConfig::preset("toy");
    cfg.gd_caps = {0.1};
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = NetworkConfig::preset("toy");
    cfg.sampling = "random";
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    CHECK_THROWS_AS(NetworkConfig::preset("imagenet"), ArgumentError);
}

TEST_CASE("preprocess produces consistent shapes and soft labels") {
    SceneInput scene = tiny_scene(3);
    std::size_t n = scene.cloud.size();
    REQUIRE(n > 0);
    CHECK(scene.point_features.rows == n);
    CHECK(scene.point_features.cols == kPointInputDim);
    CHECK(scene.partition.component.size() == n);
    std::size_t m = scene.partition.num_components();
    CHECK(scene.sp_coords.size() == m);
    CHECK(scene.sp_global_desc.rows == m);
    CHECK(scene.soft_labels.rows == m);
    for (std::size_t s = 0; s < m; ++s) {
        double sum = 0.0;
        for (std::size_t c = 0; c < scene.soft_labels.cols; ++c) sum += scene.soft_labels(s, c);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("forward emits logits for every point and superpoint halving follows ceil") {
    SceneInput scene = tiny_scene(4);
    NetworkConfig cfg = tiny_config();
    ParameterStore store(cfg.seed);
    GeoSparkNetwork network(cfg, store);
    ForwardOutput out = network.forward(scene, true);
    CHECK(out.tape.value(out.point_logits).rows == scene.cloud.size());
    CHECK(out.tape.value(out.point_logits).cols ==
          static_cast<std::size_t>(cfg.num_classes));
    CHECK(out.tape.value(out.sp_logits).rows == scene.partition.num_components());
    CHECK(std::isfinite(out.tape.value(out.loss).scalar()));
    CHECK(!out.param_ids.empty());

    std::vector<int> pred = network.predict(scene);
    CHECK(pred.size() == scene.cloud.size());
    for (int p : pred) {
        CHECK(p >= 0);
        CHECK(p < cfg.num_classes);
    }
}

TEST_CASE("training reduces the loss on a small scene set") {
    std::vector<SceneInput> scenes = {tiny_scene(10), tiny_scene(11)};
    NetworkConfig cfg = tiny_config();
    ParameterStore store(cfg.seed);
    GeoSparkNetwork network(cfg, store);
    double first = 0.0, last = 0.0;
    for (int step = 0; step < 12; ++step) {
        double loss = network.train_step(scenes[step % 2]);
        if (step < 2) first += loss;
        if (step >= 10) last += loss;
    }
    CHECK(last < first);
}

TEST_CASE("train_network writes metrics and checkpoints; resume reproduces the trajectory") {
    std::vector<SceneInput> train = {tiny_scene(20), tiny_scene(21), tiny_scene(22)};
    std::vector<SceneInput> val = {tiny_scene(23)};
    NetworkConfig cfg = tiny_config();
    cfg.epochs = 4;

    // run A: 4 epochs straight through
    std::string dir_a = temp_dir("gs_train_a");
    ParameterStore store_a(cfg.seed);
    GeoSparkNetwork net_a(cfg, store_a);
    TrainResult res_a = train_network(net_a, train, val, dir_a);
    CHECK(res_a.logs.size() == 4);
    CHECK(std::filesystem::exists(dir_a + "/metrics.csv"));
    CHECK(std::filesystem::exists(dir_a + "/best.ckpt"));
    CHECK(std::filesystem::exists(dir_a + "/last.ckpt"));

    // run B: 2 epochs, then resume for the remaining 2
    std::string dir_b = temp_dir("gs_train_b");
    {
        NetworkConfig half = cfg;
        half.epochs = 2;
        ParameterStore store_b(cfg.seed);
        GeoSparkNetwork net_b(half, store_b);
        train_network(net_b, train, val, dir_b);
    }
    ParameterStore store_b2(cfg.seed);
    GeoSparkNetwork net_b2(cfg, store_b2);
    TrainResult res_b = train_network(net_b2, train, val, dir_b, true);
    REQUIRE(res_b.logs.size() == 2);  // epochs 2 and 3 only
    CHECK(res_b.logs[0].loss == doctest::Approx(res_a.logs[2].loss).epsilon(1e-9));
    CHECK(res_b.logs[1].loss == doctest::Approx(res_a.logs[3].loss).epsilon(1e-9));
    CHECK(res_b.logs[1].miou == doctest::Approx(res_a.logs[3].miou).epsilon(1e-9));

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("local-only configuration skips the superpoint head") {
    SceneInput scene = tiny_scene(30);
    NetworkConfig cfg = tiny_config();
    cfg.k_global = 0;
    cfg.sampling = "fps";
    cfg.beta = 0.0;
    ParameterStore store(cfg.seed);
    GeoSparkNetwork network(cfg, store);
    ForwardOutput out = network.forward(scene, true);
    CHECK(out.sp_logits == -1);
    CHECK(std::isfinite(out.tape.value(out.loss).scalar()));
    for (const auto& [name, id] : out.param_ids) CHECK(name.rfind("sp_", 0) != 0);
}
