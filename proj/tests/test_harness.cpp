#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cumlog/harness.hpp"

using namespace cumlog;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("cumlog_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config round-trip: parse after serialize is the identity") {
    ExperimentConfig cfg;
    cfg.network = "3n4l";
    cfg.routes = "all-simple";
    cfg.engine = "sa";
    cfg.eta = "power:-0.99";
    cfg.r = "power:1";
    cfg.s0 = "normal:3:0.5";
    cfg.max_days = 777;
    cfg.gap_tol = 1e-7;
    cfg.out_dir = "/tmp/somewhere";
    cfg.seeds = {1, 2, 3};
    cfg.classes = "0.1:0.5,10:0.5";
    ExperimentConfig back = ExperimentConfig::parse(cfg.serialize());
    CHECK(back.network == cfg.network);
    CHECK(back.routes == cfg.routes);
    CHECK(back.engine == cfg.engine);
    CHECK(back.eta == cfg.eta);
    CHECK(back.r == cfg.r);
    CHECK(back.s0 == cfg.s0);
    CHECK(back.max_days == cfg.max_days);
    CHECK(back.gap_tol == cfg.gap_tol);
    CHECK(back.out_dir == cfg.out_dir);
    CHECK(back.seeds == cfg.seeds);
    CHECK(back.classes == cfg.classes);
    CHECK(back.serialize() == cfg.serialize());
}

TEST_CASE("config parse: rejects malformed input") {
    CHECK_THROWS_WITH_AS(ExperimentConfig::parse("network 3n4l\n"),
                         doctest::Contains("line 1"), std::runtime_error);
    CHECK_THROWS_WITH_AS(ExperimentConfig::parse("bogus_key=1\n"),
                         doctest::Contains("unknown key"), std::runtime_error);
    CHECK_THROWS_AS(ExperimentConfig::parse("max_days=0\n"), std::runtime_error);
    CHECK_THROWS_AS(ExperimentConfig::parse("gap_tol=-1\n"), std::runtime_error);
    // comments and blank lines are fine
    ExperimentConfig ok = ExperimentConfig::parse("# comment\n\n[experiment]\nnetwork=3n4l\n");
    CHECK(ok.network == "3n4l");
}

TEST_CASE("preset registry") {
    auto names = list_presets();
    for (const char* expect : {"fig2", "fig5", "fig6-schedules", "fig7-models", "fig8-classes",
                               "entropy-sweep", "sioux-routes"})
        CHECK(std::find(names.begin(), names.end(), expect) != names.end());

    std::string d = describe_preset("fig2");
    CHECK(d.find("three-parallel") != std::string::npos);
    CHECK(d.find("0.25") != std::string::npos);
    CHECK_THROWS_AS(describe_preset("unknown"), std::runtime_error);
    CHECK_THROWS_AS(preset_config("unknown"), std::runtime_error);
    CHECK(preset_config("fig2").network == "three-parallel");
    CHECK(preset_configs("fig5").size() == 7);
    CHECK(preset_configs("fig7-models").size() == 5);
}

TEST_CASE("run_experiment: converging run exits 0 with a summary") {
    ExperimentConfig cfg;
    cfg.network = "3n4l";
    cfg.eta = "constant:1";
    cfg.r = "constant:1";
    cfg.max_days = 120;
    cfg.gap_tol = 1e-9;
    ExperimentResult result = run_experiment(cfg);
    CHECK(result.exit_code == 0);
    REQUIRE(result.runs.size() == 1);
    CHECK(result.runs[0].status == Termination::Converged);
    CHECK(result.runs[0].days < 30);
    CHECK(result.runs[0].final_gap < 1e-9);
}

TEST_CASE("run_experiment: divergence exits 2") {
    ExperimentConfig cfg;
    cfg.network = "3n4l";
    cfg.eta = "constant:1";
    cfg.r = "constant:2.5";
    cfg.max_days = 120;
    cfg.gap_tol = 1e-9;
    ExperimentResult result = run_experiment(cfg);
    CHECK(result.exit_code == 2);
    REQUIRE(result.runs.size() == 1);
    CHECK(result.runs[0].status == Termination::Diverged);
}

TEST_CASE("run_experiment: invalid specs are rejected") {
    ExperimentConfig cfg;
    cfg.network = "3n4l";
    cfg.eta = "quadratic:1";
    CHECK_THROWS_AS(run_experiment(cfg), std::runtime_error);
    cfg.eta = "constant:1";
    cfg.engine = "psychic";
    CHECK_THROWS_AS(run_experiment(cfg), std::runtime_error);
    cfg.engine = "cumlog";
    cfg.network = "tntp:/no/such/file:/neither";
    CHECK_THROWS_AS(run_experiment(cfg), std::runtime_error);
}

TEST_CASE("run_experiment: output files and byte-identical reruns") {
    TempDir a("out_a"), b("out_b");
    ExperimentConfig cfg;
    cfg.network = "3n4l";
    cfg.eta = "constant:1";
    cfg.r = "constant:1";
    cfg.s0 = "normal";
    cfg.seeds = {0, 1};
    cfg.max_days = 200;
    cfg.gap_tol = 1e-6;

    cfg.out_dir = a.path.string();
    run_experiment(cfg);
    cfg.out_dir = b.path.string();
    run_experiment(cfg);

    for (const char* name : {"run_seed0.csv", "run_seed1.csv", "run_seed0.json", "summary.json"}) {
        INFO("file ", name);
        CHECK(slurp(a.path / name) == slurp(b.path / name));
    }
    CHECK(slurp(a.path / "summary.json").find("\"label\":\"run_seed0\"") != std::string::npos);
}

TEST_CASE("run_experiment: worker parallelism keeps seed-order results") {
    ExperimentConfig cfg;
    cfg.network = "3n4l";
    cfg.eta = "constant:1";
    cfg.r = "constant:1";
    cfg.s0 = "normal";
    cfg.seeds = {0, 1, 2, 3};
    cfg.max_days = 200;
    cfg.gap_tol = 1e-6;
    ExperimentResult serial = run_experiment(cfg, 1);
    ExperimentResult parallel = run_experiment(cfg, 4);
    REQUIRE(serial.runs.size() == parallel.runs.size());
    for (size_t i = 0; i < serial.runs.size(); ++i) {
        CHECK(serial.runs[i].label == parallel.runs[i].label);
        CHECK(serial.runs[i].days == parallel.runs[i].days);
        CHECK(serial.runs[i].final_gap == parallel.runs[i].final_gap);
        CHECK(serial.runs[i].entropy == parallel.runs[i].entropy);
    }
}

TEST_CASE("run_experiment: multiclass configs") {
    ExperimentConfig cfg;
    cfg.network = "3n4l";
    cfg.eta = "constant:1";
    cfg.classes = "0.1:0.5,1:0.5";
    cfg.max_days = 100;
    ExperimentResult result = run_experiment(cfg);
    REQUIRE(result.runs.size() == 2);
    CHECK(result.runs[0].label == "class_r0.1");
    CHECK(result.runs[1].label == "class_r1");
    CHECK(result.exit_code == 0);
}
