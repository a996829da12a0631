#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "corrnet/pipeline.hpp"
#include "corrnet/rng.hpp"

using namespace corrnet;
namespace fs = std::filesystem;

namespace {

// small end-to-end configuration: 3 realizations x 2 couplings of a 12-node
// ER system, short series, tiny model
ExperimentConfig mini_config(const fs::path& out_dir) {
    ExperimentConfig c;
    c.network.model = "er";
    c.network.nodes = 12;
    c.network.mean_degree = 4.0;
    c.network.realizations = 3;
    c.dynamics.kind = OscKind::Rossler;
    c.dynamics.couplings = {0.01, 0.06};
    c.dynamics.sim.dt = 0.01;
    c.dynamics.sim.transient_time = 20.0;
    c.dynamics.sim.sample_stride = 5;
    c.dynamics.sim.length = 200;
    c.window.n = {4};
    c.window.w = {30};
    c.window.skip = {20};
    c.window.mode = SelectionMode::HD;
    c.train.hidden = {16};
    c.train.epochs = 5;
    c.train.batch_size = 8;
    c.train.learning_rate = 1e-3;
    c.split_fraction = 2.0 / 3.0;
    c.seed = 424242;
    c.output_dir = out_dir.string();
    return c;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config json round trips") {
    const ExperimentConfig c = mini_config("somewhere");
    const nlohmann::json j = config_to_json(c);
    const ExperimentConfig back = config_from_json(j);
    CHECK(config_to_json(back) == j);
    CHECK(config_to_json(config_from_json(config_to_json(back))) == j);
}

TEST_CASE("config parsing validates enums and grids") {
    nlohmann::json j = config_to_json(mini_config("x"));
    j["method"] = "kendall";
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    j = config_to_json(mini_config("x"));
    j["dynamics"]["couplings"] = nlohmann::json::array();
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    j = config_to_json(mini_config("x"));
    j["window"]["mode"] = "mid";
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
}

TEST_CASE("generate_sources is deterministic and realization-major") {
    const ExperimentConfig c = mini_config("unused");
    const SourceSet a = generate_sources(c);
    const SourceSet b = generate_sources(c);
    REQUIRE(a.sources.size() == 6u);
    REQUIRE(a.graphs.size() == 3u);
    for (std::size_t i = 0; i < a.sources.size(); ++i) {
        CHECK(a.sources[i].series == b.sources[i].series);
        CHECK(a.sources[i].id == i + 1);
    }
    // realization-major: sources 1,2 share graph 0; 3,4 graph 1; ...
    CHECK(a.sources[0].graph_index == 0);
    CHECK(a.sources[1].graph_index == 0);
    CHECK(a.sources[2].graph_index == 1);
    CHECK(a.sources[0].coupling == 0.01);
    CHECK(a.sources[1].coupling == 0.06);
}

TEST_CASE("dataset_for_ids windows the requested sources") {
    const ExperimentConfig c = mini_config("unused");
    const SourceSet set = generate_sources(c);
    const Dataset ds = dataset_for_ids(set, {2, 5}, 4, 30, 20, SelectionMode::HD,
                                       Normalize::None);
    const int f = window_count(200, 30, 20);
    CHECK(ds.size() == static_cast<std::size_t>(2 * f));
    CHECK(ds.source_ids == std::vector<std::uint64_t>{2, 5});
    CHECK(ds.meta.n == 4);
    CHECK(ds.inputs[0].size() == 120);
}

TEST_CASE("run_pipeline writes a complete verifiable manifest") {
    TempDir dir("corrnet_pipeline_run");
    const ExperimentConfig c = mini_config(dir.path);
    const PipelineResult result = run_pipeline(c);

    CHECK(result.train_sources == 4);
    CHECK(result.test_sources == 2);
    CHECK(std::isfinite(result.test_avg_mse));
    CHECK(result.test_avg_mse >= 0.0);
    CHECK(result.baseline_avg_mse > 0.0);

    for (const char* artifact :
         {"graphs/graph_0.edges", "series/source_1.bin", "corr/source_6.bin",
          "datasets/train.bin", "datasets/test.bin", "model.bin", "history.csv",
          "predictions.bin", "results.csv", "manifest.json"})
        CHECK(fs::exists(dir.path / artifact));

    verify_manifest(dir.path / "manifest.json");

    // tampering must be detected
    {
        std::ofstream out(dir.path / "results.csv", std::ios::app);
        out << "tampered\n";
    }
    CHECK_THROWS_WITH_AS(verify_manifest(dir.path / "manifest.json"),
                         doctest::Contains("hash mismatch"), std::runtime_error);
}

TEST_CASE("rerunning the pipeline reproduces the manifest byte for byte") {
    TempDir dir("corrnet_pipeline_determinism");
    const ExperimentConfig c = mini_config(dir.path);
    run_pipeline(c);
    const std::string first = slurp(dir.path / "manifest.json");
    run_pipeline(c);
    const std::string second = slurp(dir.path / "manifest.json");
    CHECK(first == second);
    CHECK(first.find("fnv1a64") != std::string::npos);
}

TEST_CASE("sweep emits one row per cell and its averages are recomputable") {
    TempDir dir("corrnet_pipeline_sweep");
    ExperimentConfig c = mini_config(dir.path);
    c.window.n = {2, 4};
    const auto rows = run_sweep(c);
    REQUIRE(rows.size() == 2u);
    CHECK(rows[0].n == 2);
    CHECK(rows[1].n == 4);
    CHECK(fs::exists(dir.path / "results.csv"));

    // Eq.-6 consistency: recompute each cell's average from saved predictions
    const SourceSet set = generate_sources(c);
    const auto [train_ids, test_ids] =
        split_by_source(set.ids(), c.split_fraction,
                        rng::derive_seed(c.seed, seed_purpose::kSplit, 0));
    for (const auto& row : rows) {
        const Dataset test_ds = dataset_for_ids(set, test_ids, row.n, row.w, row.skip,
                                                row.mode, c.normalize);
        const std::string cell = "cell_n" + std::to_string(row.n) + "_w" +
                                 std::to_string(row.w) + "_s" + std::to_string(row.skip) +
                                 "_hd";
        const auto predictions = load_predictions(dir.path / (cell + "_predictions.bin"));
        REQUIRE(predictions.size() == test_ds.size());
        std::vector<double> window_mses;
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            CorrVector pred;
            pred.values = predictions[i].values;
            pred.node_count = test_ds.targets[0].node_count;
            window_mses.push_back(mse(test_ds.target_of(i), pred));
        }
        CHECK(avg_mse(window_mses) == row.avg_mse);
    }
}

TEST_CASE("sweep rejects an empty grid") {
    ExperimentConfig c = mini_config("unused");
    nlohmann::json j = config_to_json(c);
    j["window"]["n"] = nlohmann::json::array();
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
}

TEST_CASE("ablation uses nested subsets and matches the pipeline at fraction 1") {
    TempDir dir("corrnet_pipeline_ablation");
    ExperimentConfig c = mini_config(dir.path);
    const PipelineResult full = run_pipeline(c);

    TempDir dir2("corrnet_pipeline_ablation2");
    c.output_dir = dir2.path.string();
    const auto rows = run_ablation(c, {1.0, 0.5});
    REQUIRE(rows.size() == 2u);
    CHECK(rows[0].fraction == 1.0);
    CHECK(rows[0].train_sources == 4);
    CHECK(rows[1].train_sources == 2);
    CHECK(rows[0].avg_mse == full.test_avg_mse);
    CHECK(fs::exists(dir2.path / "ablation.csv"));

    CHECK_THROWS_AS(run_ablation(c, {0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(run_ablation(c, {1.5}), std::invalid_argument);
}

TEST_CASE("fnv1a64 hashes file content") {
    TempDir dir("corrnet_pipeline_hash");
    const fs::path a = dir.path / "a.txt";
    const fs::path b = dir.path / "b.txt";
    {
        std::ofstream(a) << "hello";
        std::ofstream(b) << "hello";
    }
    CHECK(fnv1a64_file(a) == fnv1a64_file(b));
    {
        std::ofstream(b) << "hellp";
    }
    CHECK(fnv1a64_file(a) != fnv1a64_file(b));
}
