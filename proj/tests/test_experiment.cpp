#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kdlab/experiment.hpp"
#include "kdlab/fixtures.hpp"
#include "kdlab/serialization.hpp"

using namespace kdlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("kdlab-test-" + tag + "-" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
};

ExperimentConfig small_train_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.task = "FIXTURE-B";
    cfg.out_dir = out;
    cfg.sft_steps = 10;
    cfg.dataset_size = 64;
    cfg.train.max_steps = 120;
    cfg.train.eval_every = 40;
    cfg.train.seed = 3;
    return cfg;
}

}  // namespace

TEST_CASE("experiment configs round trip through their snapshots") {
    ExperimentConfig cfg;
    cfg.task = "FIXTURE-B";
    cfg.policy_kind = PolicyKind::linear_softmax;
    cfg.train.method = Method::rkl;
    cfg.train.mode = Mode::on;
    cfg.train.eta = 0.125;
    cfg.train.seed = 42;
    cfg.sft_steps = 77;
    cfg.sweep_methods = {Method::mm, Method::tv};
    cfg.sweep_seeds = {9, 10};
    const std::string text = experiment_config_to_json(cfg);
    const ExperimentConfig back = experiment_config_from_json(text);
    CHECK(experiment_config_to_json(back) == text);
    CHECK(back.train.method == Method::rkl);
    CHECK(back.train.eta == 0.125);
    CHECK(back.sweep_methods == cfg.sweep_methods);
}

TEST_CASE("task specs resolve fixtures, files, and errors") {
    CHECK(load_task_spec("FIXTURE-A").name == "FIXTURE-A");
    CHECK_THROWS_AS(load_task_spec("FIXTURE-NOPE"), UnknownFixtureError);

    TempDir dir("taskfile");
    const std::string path = (dir.path / "task.json").string();
    write_text_file(path, task_to_json(make_fixture_task("FIXTURE-B")));
    CHECK(load_task_spec(path).horizon == 3);
}

TEST_CASE("training runs persist their artifacts and reproduce byte-identically") {
    TempDir d1("train1"), d2("train2");
    std::ostringstream out1, out2;
    CHECK(cmd_train(small_train_config(d1.str()), out1) == 0);
    CHECK(cmd_train(small_train_config(d2.str()), out2) == 0);

    fs::path run1, run2;
    for (const auto& e : fs::directory_iterator(d1.path))
        if (e.is_directory()) run1 = e.path();
    for (const auto& e : fs::directory_iterator(d2.path))
        if (e.is_directory()) run2 = e.path();
    REQUIRE(!run1.empty());
    for (const char* artifact :
         {"config.json", "metrics.jsonl", "policy.json", "summary.json"})
        CHECK(fs::exists(run1 / artifact));

    CHECK(read_text_file((run1 / "metrics.jsonl").string()) ==
          read_text_file((run2 / "metrics.jsonl").string()));
    // Configs match except for the output paths they were given.
    auto j1 = nlohmann::json::parse(read_text_file((run1 / "config.json").string()));
    auto j2 = nlohmann::json::parse(read_text_file((run2 / "config.json").string()));
    j1.erase("out_dir");
    j2.erase("out_dir");
    CHECK(j1 == j2);

    const auto rows = read_metrics_file((run1 / "metrics.jsonl").string());
    CHECK(rows.size() == 1 + 120 / 40);
    CHECK(rows.front().step == 0);
    CHECK(rows.back().step == 120);
}

TEST_CASE("baseline dispatch lands in the run config snapshot") {
    TempDir dir("dispatch");
    ExperimentConfig cfg = small_train_config(dir.str());
    cfg.train.method = Method::tv;
    cfg.train.mode = Mode::off;
    std::ostringstream out;
    CHECK(cmd_train(cfg, out) == 0);
    bool found = false;
    for (const auto& e : fs::directory_iterator(dir.path)) {
        if (!e.is_directory()) continue;
        found = true;
        const ExperimentConfig snap = experiment_config_from_json(
            read_text_file((e.path() / "config.json").string()));
        CHECK(snap.train.method == Method::tv);
        CHECK(snap.train.mode == Mode::off);
        CHECK(e.path().filename().string().find("tv_off") != std::string::npos);
    }
    CHECK(found);
}

TEST_CASE("verification passes on the small fixture and flags injected faults") {
    TempDir dir("verify");
    ExperimentConfig cfg;
    cfg.task = "FIXTURE-A";
    cfg.out_dir = dir.str();
    cfg.grad_check_points = 3;
    std::ostringstream out;
    CHECK(cmd_verify(cfg, out) == 0);
    CHECK(fs::exists(dir.path / "verify-FIXTURE-A" / "certification.json"));
    CHECK(fs::exists(dir.path / "verify-FIXTURE-A" / "gradient_checks.json"));

    ExperimentConfig bad = cfg;
    bad.inject_gradient_fault = true;
    std::ostringstream out2;
    CHECK(cmd_verify(bad, out2) != 0);
    CHECK(out2.str().find("loss_wrt_theta") != std::string::npos);
    CHECK(out2.str().find("FAIL") != std::string::npos);
}

TEST_CASE("verification surfaces the enumeration guard") {
    TempDir dir("cap");
    ExperimentConfig cfg;
    cfg.task = "FIXTURE-B";
    cfg.out_dir = dir.str();
    cfg.train.cap = 4;  // far below the fixture's 128 trajectories
    std::ostringstream out;
    CHECK_THROWS_AS(cmd_verify(cfg, out), CapExceededError);
}

TEST_CASE("sweep runs write cell directories and summary tables") {
    TempDir dir("sweep");
    ExperimentConfig cfg;
    cfg.task = "FIXTURE-B";
    cfg.out_dir = dir.str();
    cfg.sft_steps = 5;
    cfg.dataset_size = 32;
    cfg.train.max_steps = 20;
    cfg.train.eval_every = 10;
    cfg.sweep_methods = {Method::mm, Method::tv};
    cfg.sweep_modes = {Mode::joint};
    cfg.sweep_seeds = {1, 2};
    std::ostringstream out;
    CHECK(cmd_sweep(cfg, out) == 0);
    const fs::path root = dir.path / "sweep-FIXTURE-B";
    CHECK(fs::exists(root / "sweep_summary.json"));
    CHECK(fs::exists(root / "sweep_summary.csv"));
    std::size_t cells = 0;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) ++cells;
    CHECK(cells == 4);
}

TEST_CASE("plot exports project the requested columns") {
    TempDir dir("export");
    ExperimentConfig cfg = small_train_config(dir.str());
    std::ostringstream out;
    REQUIRE(cmd_train(cfg, out) == 0);
    fs::path run;
    for (const auto& e : fs::directory_iterator(dir.path))
        if (e.is_directory()) run = e.path();

    const std::string loss_csv = (dir.path / "loss.csv").string();
    std::ostringstream sink;
    CHECK(cmd_export_plot({run.string()}, PlotKind::loss_curve, loss_csv,
                          sink) == 0);
    std::ifstream in(loss_csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,loss");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 1 + 120 / 40);  // one per evaluation

    const std::string bars_csv = (dir.path / "bars.csv").string();
    CHECK(cmd_export_plot({run.string()}, PlotKind::distance_bars, bars_csv,
                          sink) == 0);
    std::ifstream bars(bars_csv);
    std::getline(bars, line);
    CHECK(line ==
          "method,mode,n,gap_mean,gap_stdev,d_mm_on_mean,d_mm_on_stdev,"
          "d_mm_off_mean,d_mm_off_stdev");
    std::getline(bars, line);
    CHECK(line.rfind("mm,joint,1,", 0) == 0);

    CHECK_THROWS_AS(cmd_export_plot({dir.str()}, PlotKind::loss_curve,
                                    (dir.path / "x.csv").string(), sink),
                    MissingMetricsError);
}

TEST_CASE("plot kind names round trip") {
    for (PlotKind k : {PlotKind::loss_curve, PlotKind::mm_curve,
                       PlotKind::gap_curve, PlotKind::distance_bars})
        CHECK(plot_kind_from_string(to_string(k)) == k);
    CHECK_THROWS(plot_kind_from_string("nosuch"));
}
