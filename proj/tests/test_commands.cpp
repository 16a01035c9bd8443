#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "helpers.hpp"
#include "tsadapt/commands.hpp"
#include "tsadapt/errors.hpp"
#include "tsadapt/json_io.hpp"
#include "tsadapt/num_format.hpp"

using namespace tsadapt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tsadapt_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str(const std::string& name = "") const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Small, fast synthetic setup shared by the command tests.
RunConfig small_config(const TempDir& dir) {
    RunConfig cfg;
    cfg.use_synthetic = true;
    cfg.synth.length_train = 300;
    cfg.synth.length_test = 300;
    cfg.synth.period = 25;
    cfg.synth.shift_at = 150;
    cfg.synth.shift_magnitude = 5.0;
    cfg.synth.anomaly_count = 6;
    cfg.synth.anomaly_magnitude = 3.0;
    cfg.synth.noise_std = 0.05;
    cfg.synth.seed = 4;
    cfg.epochs = 8;
    cfg.out_dir = dir.str("out");
    return cfg;
}

} // namespace

TEST_SUITE("commands") {

TEST_CASE("config file round-trips exactly") {
    TempDir dir;
    RunConfig cfg;
    cfg.train_path = "a.csv";
    cfg.test_path = "b.csv";
    cfg.window = 12;
    cfg.stride_train = 3;
    cfg.gamma = 0.99999;
    cfg.eta = 0.001;
    cfg.threshold = "q99.9";
    cfg.seeds = {7, 8, 9};
    cfg.use_detrend = false;
    cfg.synth.amplitude = 2.5;
    cfg.synth.seed = 13;

    const std::string path = dir.str("run.conf");
    cfg.save(path);
    CHECK(RunConfig::from_file(path) == cfg);
}

TEST_CASE("config file rejects unknown keys") {
    TempDir dir;
    const std::string path = dir.str("bad.conf");
    std::ofstream(path) << "windw = 5\n";
    CHECK_THROWS_WITH_AS(RunConfig::from_file(path), doctest::Contains("unknown key"),
                         InvalidInput);
}

TEST_CASE("cmd_train writes checkpoint, scores, and the threshold table") {
    TempDir dir;
    RunConfig cfg = small_config(dir);
    cmd_train(cfg);

    CHECK(fs::exists(dir.str("out/checkpoint.tsad")));
    CHECK(fs::exists(dir.str("out/train_scores.csv")));
    const std::string table = slurp(dir.str("out/thresholds.csv"));
    // header + Q90.0 .. Q100.0 at 0.1 steps
    CHECK(std::count(table.begin(), table.end(), '\n') == 102);

    SUBCASE("checkpoint round-trips bit-exact") {
        const auto bytes = read_bytes(dir.str("out/checkpoint.tsad"));
        const Checkpoint ckpt = deserialize_checkpoint(bytes);
        CHECK(serialize_checkpoint(ckpt) == bytes);
    }

    SUBCASE("rerun is bitwise identical") {
        RunConfig again = cfg;
        again.out_dir = dir.str("out2");
        cmd_train(again);
        CHECK(slurp(dir.str("out/checkpoint.tsad")) == slurp(dir.str("out2/checkpoint.tsad")));
        CHECK(slurp(dir.str("out/train_scores.csv")) ==
              slurp(dir.str("out2/train_scores.csv")));
    }
}

TEST_CASE("cmd_train with epochs=0 checkpoints the fresh initialization") {
    TempDir dir;
    RunConfig cfg = small_config(dir);
    cfg.epochs = 0;
    cmd_train(cfg);
    const Checkpoint ckpt = deserialize_checkpoint(read_bytes(dir.str("out/checkpoint.tsad")));

    const TimeSeriesDataset train = load_train_source(cfg);
    ModelDims dims{cfg.window, 1, cfg.effective_hidden(), cfg.latent};
    CHECK(ckpt.model == MlpAutoencoder::init(dims, cfg.seed));
}

TEST_CASE("cmd_train on a missing file names the path") {
    TempDir dir;
    RunConfig cfg;
    cfg.train_path = dir.str("absent.csv");
    cfg.out_dir = dir.str("out");
    CHECK_THROWS_WITH_AS(cmd_train(cfg), doctest::Contains("absent.csv"), InvalidInput);
}

TEST_CASE("detect pipeline") {
    TempDir dir;
    RunConfig cfg = small_config(dir);
    cmd_train(cfg);
    cfg.checkpoint_path = dir.str("out/checkpoint.tsad");
    cmd_detect(cfg);

    const std::string stream_csv = slurp(dir.str("out/stream.csv"));

    SUBCASE("row count equals the covered timesteps") {
        // floor((N-w)/stride)*stride + w with stride = w
        const std::size_t covered = (300 - 5) / 5 * 5 + 5;
        CHECK(std::count(stream_csv.begin(), stream_csv.end(), '\n') == covered + 1);
    }

    SUBCASE("summary report matches re-evaluating the stream csv") {
        const auto summary = read_json(dir.str("out/summary.json"));
        REQUIRE(!summary["report"].is_null());

        RunConfig eval_cfg;
        eval_cfg.scores_path = dir.str("out/stream.csv");
        eval_cfg.checkpoint_path = cfg.checkpoint_path;
        eval_cfg.threshold = cfg.threshold;
        eval_cfg.out_dir = dir.str("eval");
        cmd_evaluate(eval_cfg);
        const auto report = read_json(dir.str("eval/report.json"));
        CHECK(report == summary["report"]);
    }

    SUBCASE("rerun is bitwise identical") {
        RunConfig again = cfg;
        again.out_dir = dir.str("out3");
        cmd_detect(again);
        CHECK(slurp(dir.str("out3/stream.csv")) == stream_csv);
        CHECK(slurp(dir.str("out3/summary.json")) == slurp(dir.str("out/summary.json")));
    }

    SUBCASE("ablation degeneracy: both branches off equals offline inference") {
        RunConfig off = cfg;
        off.use_detrend = false;
        off.use_tta = false;
        off.out_dir = dir.str("out_off");
        cmd_detect(off);

        const Checkpoint ckpt = deserialize_checkpoint(read_bytes(cfg.checkpoint_path));
        const TimeSeriesDataset test = apply_scaler(load_test_source(cfg), ckpt.scaler);
        std::vector<double> expected;
        for (const Window& w : make_windows(test, cfg.window, cfg.window)) {
            const ScoreVector s = score(w, ckpt.model.forward(w));
            expected.insert(expected.end(), s.begin(), s.end());
        }

        const TimeSeriesDataset stream = load_csv(dir.str("out_off/stream.csv"));
        const std::size_t score_col = 1; // timestep,score,pred,label,mu_value
        REQUIRE(stream.timesteps() == expected.size());
        for (std::size_t t = 0; t < expected.size(); ++t) {
            CHECK(stream.values(t, score_col) == expected[t]);
        }
    }

    SUBCASE("oracle threshold is rejected for streaming") {
        RunConfig bad = cfg;
        bad.threshold = "oracle";
        bad.out_dir = dir.str("out4");
        CHECK_THROWS_AS(cmd_detect(bad), InvalidInput);
    }
}

TEST_CASE("cmd_evaluate") {
    TempDir dir;

    SUBCASE("perfect separation scores 1.0 everywhere") {
        std::ofstream(dir.str("scores.csv"))
            << "score,label\n0.1,0\n0.2,0\n0.9,1\n0.8,1\n";
        RunConfig cfg;
        cfg.scores_path = dir.str("scores.csv");
        cfg.threshold = "fixed:0.5";
        cfg.out_dir = dir.str("out");
        cmd_evaluate(cfg);
        const auto report = read_json(dir.str("out/report.json"));
        CHECK(report["F1"] == 1.0);
        CHECK(report["F1+"] == 1.0);
        CHECK(report["AUROC"] == 1.0);
        CHECK(report["AUPRC"] == 1.0);
    }

    SUBCASE("all-negative labels null the ranking metrics") {
        std::ofstream(dir.str("scores.csv")) << "score,label\n0.1,0\n0.9,0\n";
        RunConfig cfg;
        cfg.scores_path = dir.str("scores.csv");
        cfg.threshold = "fixed:0.5";
        cfg.out_dir = dir.str("out");
        cmd_evaluate(cfg);
        const auto report = read_json(dir.str("out/report.json"));
        CHECK(report["AUROC"].is_null());
        CHECK(report["AUPRC"].is_null());
        CHECK(report["F1"] == 0.0);
    }

    SUBCASE("oracle beats every percentile spec") {
        std::ostringstream csv;
        csv << "score,label\n";
        std::mt19937_64 rng(33);
        std::uniform_real_distribution<double> v(0.0, 1.0);
        for (int i = 0; i < 60; ++i) {
            const int y = i % 7 == 0 ? 1 : 0;
            csv << format_double(v(rng) + (y ? 0.4 : 0.0)) << ',' << y << '\n';
        }
        std::ofstream(dir.str("scores.csv")) << csv.str();
        std::ofstream(dir.str("train_scores.csv")) << "index,score\n0,0.2\n1,0.5\n2,0.8\n";

        RunConfig cfg;
        cfg.scores_path = dir.str("scores.csv");
        cfg.train_scores_path = dir.str("train_scores.csv");
        cfg.out_dir = dir.str("out");

        cfg.threshold = "oracle";
        cmd_evaluate(cfg);
        const double oracle_f1 = read_json(dir.str("out/report.json"))["F1"].get<double>();

        for (const std::string spec : {"q50", "q90", "q99"}) {
            cfg.threshold = spec;
            cmd_evaluate(cfg);
            CHECK(oracle_f1 >= read_json(dir.str("out/report.json"))["F1"].get<double>());
        }
    }

    SUBCASE("percentile spec without train scores is an error") {
        std::ofstream(dir.str("scores.csv")) << "score,label\n0.1,0\n0.9,1\n";
        RunConfig cfg;
        cfg.scores_path = dir.str("scores.csv");
        cfg.threshold = "q99";
        cfg.out_dir = dir.str("out");
        CHECK_THROWS_AS(cmd_evaluate(cfg), InvalidInput);
    }

    SUBCASE("separate labels file, including the bare single-column form") {
        std::ofstream(dir.str("scores.csv")) << "score\n0.1\n0.2\n0.9\n";
        std::ofstream(dir.str("labels.csv")) << "label\n0\n0\n1\n";
        RunConfig cfg;
        cfg.scores_path = dir.str("scores.csv");
        cfg.labels_path = dir.str("labels.csv");
        cfg.threshold = "fixed:0.5";
        cfg.out_dir = dir.str("out");
        cmd_evaluate(cfg);
        CHECK(read_json(dir.str("out/report.json"))["F1"] == 1.0);

        std::ofstream(dir.str("short.csv")) << "label\n0\n1\n";
        cfg.labels_path = dir.str("short.csv");
        CHECK_THROWS_AS(cmd_evaluate(cfg), InvalidInput);
    }
}

TEST_CASE("cmd_synth round-trips through load_csv") {
    TempDir dir;
    RunConfig cfg = small_config(dir);
    cmd_synth(cfg);

    const auto [train, test] = generate_synthetic(cfg.synth);
    CHECK(load_csv(dir.str("out/train.csv")) == train);
    const TimeSeriesDataset reloaded = load_csv(dir.str("out/test.csv"), std::string("label"));
    CHECK(reloaded == test);

    int label_sum = 0;
    for (int y : *reloaded.labels) label_sum += y;
    CHECK(label_sum == static_cast<int>(cfg.synth.anomaly_count));

    SUBCASE("same seed, same files") {
        RunConfig again = cfg;
        again.out_dir = dir.str("out2");
        cmd_synth(again);
        CHECK(slurp(dir.str("out/train.csv")) == slurp(dir.str("out2/train.csv")));
        CHECK(slurp(dir.str("out/test.csv")) == slurp(dir.str("out2/test.csv")));
    }
}

TEST_CASE("run_ablation grid") {
    TempDir dir;
    RunConfig cfg = small_config(dir);
    cfg.seeds = {0, 1};
    cfg.epochs = 5;

    const auto variants = run_ablation(cfg);
    REQUIRE(variants.size() == 4);
    CHECK(variants[0].name == "none");
    CHECK(variants[1].name == "dt");
    CHECK(variants[2].name == "tta");
    CHECK(variants[3].name == "dt+tta");
    for (const auto& v : variants) CHECK(v.trials.size() == 2);

    SUBCASE("eta = 0 makes the TTA row equal the none row exactly") {
        RunConfig frozen = cfg;
        frozen.eta = 0.0;
        const auto grid = run_ablation(frozen);
        for (std::size_t t = 0; t < grid[0].trials.size(); ++t) {
            CHECK(grid[2].trials[t].report.f1 == grid[0].trials[t].report.f1);
            CHECK(grid[2].trials[t].report.auroc == grid[0].trials[t].report.auroc);
            CHECK(grid[2].trials[t].report.auprc == grid[0].trials[t].report.auprc);
        }
    }
}

TEST_CASE("cmd_ablate writes the table in grid order") {
    TempDir dir;
    RunConfig cfg = small_config(dir);
    cfg.seeds = {0, 1};
    cfg.epochs = 4;
    cmd_ablate(cfg);

    const auto j = read_json(dir.str("out/ablation.json"));
    REQUIRE(j["variants"].size() == 4);
    for (const auto& v : j["variants"]) {
        CHECK(v.contains("F1"));
        CHECK(v.contains("F1+"));
        CHECK(v.contains("AUROC"));
        CHECK(v.contains("AUPRC"));
        CHECK(v["F1"]["std"].get<double>() >= 0.0);
        CHECK(v["trials"].size() == 2);
    }
    const std::string table = slurp(dir.str("out/ablation.txt"));
    CHECK(std::count(table.begin(), table.end(), '\n') == 5); // header + 4 rows
}

TEST_CASE("mean_std") {
    const MeanStd ms = mean_std({1.0, 2.0, 3.0});
    CHECK(ms.mean == 2.0);
    CHECK(ms.std_dev == 1.0);
    CHECK(mean_std({5.0}).std_dev == 0.0);
}

} // TEST_SUITE

TEST_SUITE("cli") {

// Exit-code contract of the installed binary; needs TSADAPT_CLI in the
// environment (set by ctest).
TEST_CASE("exit codes") {
    const char* cli = std::getenv("TSADAPT_CLI");
    if (cli == nullptr) {
        MESSAGE("TSADAPT_CLI not set, skipping");
        return;
    }
    TempDir dir;
    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };

    CHECK(run("synth --out " + dir.str("data") + " --length-train 120 --length-test 120 "
              "--period 20 --shift-at 60 --anomaly-count 3 --seed 5") == 0);
    CHECK(run("train --train " + dir.str("data/train.csv") + " --out " + dir.str("run") +
              " --epochs 2") == 0);
    CHECK(run("detect --test " + dir.str("data/test.csv") + " --checkpoint " +
              dir.str("run/checkpoint.tsad") + " --out " + dir.str("run")) == 0);
    CHECK(run("evaluate --scores " + dir.str("run/stream.csv") + " --checkpoint " +
              dir.str("run/checkpoint.tsad") + " --out " + dir.str("run")) == 0);

    // computation failures (non-finite) exit 1
    CHECK(run("train --train " + dir.str("data/train.csv") + " --out " + dir.str("div") +
              " --epochs 2 --lr 1e200") == 1);

    // usage / IO errors exit 2
    CHECK(run("train --train " + dir.str("missing.csv") + " --out " + dir.str("x")) == 2);
    CHECK(run("bogus-subcommand") == 2);
    CHECK(run("train --train a.csv --bogus-flag") == 2);
    CHECK(run("detect --test " + dir.str("data/test.csv") + " --checkpoint " +
              dir.str("run/checkpoint.tsad") + " --threshold oracle --out " + dir.str("y")) ==
          2);
}

} // TEST_SUITE
