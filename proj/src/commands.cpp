#include "tsadapt/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "tsadapt/errors.hpp"
#include "tsadapt/json_io.hpp"
#include "tsadapt/num_format.hpp"

namespace tsadapt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) {
        throw InvalidInput("cannot create output directory " + cfg.out_dir + ": " + ec.message());
    }
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

Scaler identity_scaler(std::size_t features) {
    Scaler s;
    s.mean.assign(features, 0.0);
    s.std_dev.assign(features, 1.0);
    return s;
}

std::vector<double> column_means(const TimeSeriesDataset& ds) {
    std::vector<double> mu(ds.features(), 0.0);
    for (std::size_t j = 0; j < ds.features(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < ds.timesteps(); ++i) sum += ds.values(i, j);
        mu[j] = sum / static_cast<double>(ds.timesteps());
    }
    return mu;
}

double resolve_stream_tau(const ThresholdSpec& spec, const std::vector<double>& train_scores) {
    switch (spec.kind) {
    case ThresholdSpec::Kind::Fixed:
        return spec.value;
    case ThresholdSpec::Kind::TrainPercentile:
        return percentile_threshold(train_scores, spec.value);
    case ThresholdSpec::Kind::Oracle:
    default:
        throw InvalidInput("streaming detection needs a concrete threshold; "
                           "use qP or fixed:X (oracle is evaluate-only)");
    }
}

// Generic scores CSV reader: requires a "score" column, picks up "label" and
// "timestep" when present.
struct ScoresFile {
    std::vector<double> scores;
    std::optional<std::vector<int>> labels;
};

// Label source for evaluate: any CSV with a "label" column, including a
// bare single-column file.
std::vector<int> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput(path + ": empty file");

    auto split = [](const std::string& text) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = text.find(',', start);
            std::string cell = text.substr(start, comma == std::string::npos
                                                      ? std::string::npos
                                                      : comma - start);
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
            cells.push_back(std::move(cell));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return cells;
    };

    const std::vector<std::string> header = split(line);
    const auto it = std::find(header.begin(), header.end(), "label");
    if (it == header.end()) throw InvalidInput(path + ": no 'label' column");
    const std::size_t col = static_cast<std::size_t>(it - header.begin());

    std::vector<int> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const std::vector<std::string> cells = split(line);
        if (col >= cells.size() || (cells[col] != "0" && cells[col] != "1")) {
            throw InvalidInput(path + ": row " + std::to_string(row) +
                               ": label value outside {0,1}");
        }
        labels.push_back(cells[col] == "1" ? 1 : 0);
    }
    if (labels.empty()) throw InvalidInput(path + ": no data rows");
    return labels;
}

ScoresFile read_scores_csv(const std::string& path) {
    TimeSeriesDataset raw = load_csv(path);
    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(raw.feature_names.begin(), raw.feature_names.end(), name);
        if (it == raw.feature_names.end()) return std::nullopt;
        return static_cast<std::size_t>(it - raw.feature_names.begin());
    };
    const auto score_col = find_col("score");
    if (!score_col) {
        throw InvalidInput(path + ": no 'score' column");
    }
    ScoresFile out;
    out.scores.reserve(raw.timesteps());
    for (std::size_t i = 0; i < raw.timesteps(); ++i) {
        out.scores.push_back(raw.values(i, *score_col));
    }
    if (const auto label_col = find_col("label")) {
        std::vector<int> labels(raw.timesteps(), 0);
        for (std::size_t i = 0; i < raw.timesteps(); ++i) {
            const double v = raw.values(i, *label_col);
            if (v != 0.0 && v != 1.0) {
                throw InvalidInput(path + ": row " + std::to_string(i + 1) +
                                   ": label value outside {0,1}");
            }
            labels[i] = v == 1.0 ? 1 : 0;
        }
        out.labels = std::move(labels);
    }
    return out;
}

std::string variant_name(bool dt, bool tta) {
    if (dt && tta) return "dt+tta";
    if (dt) return "dt";
    if (tta) return "tta";
    return "none";
}

} // namespace

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd ms;
    if (values.empty()) return ms;
    double sum = 0.0;
    for (double v : values) sum += v;
    ms.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - ms.mean) * (v - ms.mean);
        ms.std_dev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return ms;
}

TimeSeriesDataset load_train_source(const RunConfig& cfg) {
    if (cfg.use_synthetic) {
        return generate_synthetic(cfg.synth).first;
    }
    if (cfg.train_path.empty()) {
        throw InvalidInput("no training data: give --train or --synthetic");
    }
    return load_csv(cfg.train_path);
}

TimeSeriesDataset load_test_source(const RunConfig& cfg) {
    if (cfg.use_synthetic) {
        return generate_synthetic(cfg.synth).second;
    }
    if (cfg.test_path.empty()) {
        throw InvalidInput("no test data: give --test or --synthetic");
    }
    // Labeled test files carry a "label" column; fall back to unlabeled.
    TimeSeriesDataset probe = load_csv(cfg.test_path);
    const bool has_label = std::find(probe.feature_names.begin(), probe.feature_names.end(),
                                     "label") != probe.feature_names.end();
    if (!has_label) return probe;
    return load_csv(cfg.test_path, std::string("label"));
}

TrainedPipeline train_pipeline(const TimeSeriesDataset& train_raw, const RunConfig& cfg,
                               std::uint64_t seed) {
    const Scaler scaler =
        cfg.standardize ? fit_scaler(train_raw) : identity_scaler(train_raw.features());
    const TimeSeriesDataset train = apply_scaler(train_raw, scaler);

    const std::vector<Window> windows = make_windows(train, cfg.window, cfg.effective_stride_train());
    ModelDims dims{cfg.window, train.features(), cfg.effective_hidden(), cfg.latent};
    MlpAutoencoder model = MlpAutoencoder::init(dims, seed);
    TrainResult trained =
        train_offline(model, windows, cfg.epochs, cfg.batch_size, cfg.lr, seed);

    TrainedPipeline pipeline{
        Checkpoint{std::move(model), scaler, column_means(train), std::move(trained.train_scores)},
        std::move(trained.epoch_losses)};
    return pipeline;
}

DetectionRun run_detection(const Checkpoint& ckpt, const TimeSeriesDataset& test_raw,
                           const RunConfig& cfg, bool use_detrend, bool use_tta) {
    if (test_raw.features() != ckpt.model.dims().features) {
        throw InvalidInput("test data has " + std::to_string(test_raw.features()) +
                           " features, checkpoint expects " +
                           std::to_string(ckpt.model.dims().features));
    }
    const ThresholdSpec spec = ThresholdSpec::parse(cfg.threshold);
    const double tau = resolve_stream_tau(spec, ckpt.train_scores);

    const TimeSeriesDataset test = apply_scaler(test_raw, ckpt.scaler);

    AdaptationConfig acfg;
    acfg.gamma = cfg.gamma;
    acfg.eta = cfg.eta;
    acfg.tau = tau;
    acfg.window = cfg.window;
    acfg.use_detrend = use_detrend;
    acfg.use_tta = use_tta;

    AdaptationState state{ckpt.model, TrendEstimator(ckpt.trend_init, cfg.gamma), acfg, 0};

    DetectionRun run{run_stream(state, test, cfg.effective_stride_test()), tau, spec,
                     std::nullopt};
    if (test_raw.labels) {
        const std::size_t covered = run.stream.covered_timesteps();
        std::vector<int> labels(test_raw.labels->begin(),
                                test_raw.labels->begin() + static_cast<std::ptrdiff_t>(covered));
        run.report = evaluate(run.stream.scores, run.stream.preds, labels, tau, spec);
    }
    return run;
}

void cmd_train(const RunConfig& cfg) {
    const TimeSeriesDataset train_raw = load_train_source(cfg);
    ensure_out_dir(cfg);

    const TrainedPipeline pipeline = train_pipeline(train_raw, cfg, cfg.seed);
    const Checkpoint& ckpt = pipeline.checkpoint;

    write_bytes(out_path(cfg, "checkpoint.tsad"), serialize_checkpoint(ckpt));

    {
        std::ofstream out(out_path(cfg, "train_scores.csv"));
        if (!out) throw InvalidInput("cannot write " + out_path(cfg, "train_scores.csv"));
        out << "index,score\n";
        for (std::size_t i = 0; i < ckpt.train_scores.size(); ++i) {
            out << i << ',' << format_double(ckpt.train_scores[i]) << '\n';
        }
    }

    {
        std::ofstream out(out_path(cfg, "thresholds.csv"));
        if (!out) throw InvalidInput("cannot write " + out_path(cfg, "thresholds.csv"));
        out << "p,tau\n";
        for (int tenth = 900; tenth <= 1000; ++tenth) {
            const double p = static_cast<double>(tenth) / 10.0;
            out << format_double(p) << ',' << format_double(percentile_threshold(ckpt.train_scores, p))
                << '\n';
        }
    }

    std::cout << "trained " << ckpt.model.parameter_count() << " parameters on "
              << train_raw.timesteps() << " timesteps";
    if (!pipeline.epoch_losses.empty()) {
        std::cout << "; loss " << format_double(pipeline.epoch_losses.front()) << " -> "
                  << format_double(pipeline.epoch_losses.back());
    }
    std::cout << "\nwrote " << out_path(cfg, "checkpoint.tsad") << "\n";
}

void cmd_detect(const RunConfig& cfg) {
    if (cfg.checkpoint_path.empty()) {
        throw InvalidInput("detect needs --checkpoint");
    }
    const Checkpoint ckpt = deserialize_checkpoint(read_bytes(cfg.checkpoint_path));
    const TimeSeriesDataset test_raw = load_test_source(cfg);
    ensure_out_dir(cfg);

    const DetectionRun run = run_detection(ckpt, test_raw, cfg, cfg.use_detrend, cfg.use_tta);
    const StreamResult& stream = run.stream;

    {
        std::ofstream out(out_path(cfg, "stream.csv"));
        if (!out) throw InvalidInput("cannot write " + out_path(cfg, "stream.csv"));
        out << "timestep,score,pred";
        if (test_raw.labels) out << ",label";
        for (const std::string& name : test_raw.feature_names) out << ",mu_" << name;
        out << '\n';
        for (std::size_t t = 0; t < stream.covered_timesteps(); ++t) {
            out << t << ',' << format_double(stream.scores[t]) << ',' << stream.preds[t];
            if (test_raw.labels) out << ',' << (*test_raw.labels)[t];
            const std::size_t k = stream.window_of[t];
            for (std::size_t j = 0; j < stream.trend_trace.cols; ++j) {
                out << ',' << format_double(stream.trend_trace(k, j));
            }
            out << '\n';
        }
    }

    json summary;
    summary["command"] = "detect";
    summary["config"] = config_to_json(cfg);
    summary["tau"] = run.tau;
    summary["threshold"] = run.threshold_spec.str();
    summary["windows"] = stream.window_ends.size();
    summary["covered_timesteps"] = stream.covered_timesteps();
    summary["report"] = run.report ? report_to_json(*run.report) : json(nullptr);
    write_json(out_path(cfg, "summary.json"), summary);

    std::cout << "scored " << stream.covered_timesteps() << " timesteps in "
              << stream.window_ends.size() << " windows, tau=" << format_double(run.tau) << "\n";
    if (run.report) {
        std::cout << "F1=" << format_double(run.report->f1)
                  << " F1+=" << format_double(run.report->f1_pa) << "\n";
    }
    std::cout << "wrote " << out_path(cfg, "stream.csv") << "\n";
}

void cmd_evaluate(const RunConfig& cfg) {
    if (cfg.scores_path.empty()) {
        throw InvalidInput("evaluate needs --scores");
    }
    const ScoresFile scores_file = read_scores_csv(cfg.scores_path);

    std::vector<int> labels;
    if (!cfg.labels_path.empty()) {
        labels = read_labels_csv(cfg.labels_path);
    } else if (scores_file.labels) {
        labels = *scores_file.labels;
    } else {
        throw InvalidInput("no labels: the scores file has no 'label' column and --labels "
                           "was not given");
    }
    if (labels.size() != scores_file.scores.size()) {
        throw InvalidInput("scores and labels lengths differ (" +
                           std::to_string(scores_file.scores.size()) + " vs " +
                           std::to_string(labels.size()) + ")");
    }

    const ThresholdSpec spec = ThresholdSpec::parse(cfg.threshold);
    double tau = 0.0;
    switch (spec.kind) {
    case ThresholdSpec::Kind::Fixed:
        tau = spec.value;
        break;
    case ThresholdSpec::Kind::Oracle:
        tau = oracle_threshold(scores_file.scores, labels).first;
        break;
    case ThresholdSpec::Kind::TrainPercentile: {
        std::vector<double> train_scores;
        if (!cfg.train_scores_path.empty()) {
            train_scores = read_scores_csv(cfg.train_scores_path).scores;
        } else if (!cfg.checkpoint_path.empty()) {
            train_scores = deserialize_checkpoint(read_bytes(cfg.checkpoint_path)).train_scores;
        } else {
            throw InvalidInput("percentile thresholds need --train-scores or --checkpoint");
        }
        tau = percentile_threshold(train_scores, spec.value);
        break;
    }
    }

    std::vector<int> preds(scores_file.scores.size(), 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        preds[i] = scores_file.scores[i] > tau ? 1 : 0;
    }
    const EvalReport report = evaluate(scores_file.scores, preds, labels, tau, spec);
    if (!report.auroc) {
        std::cerr << "warning: labels are single-class, AUROC is null\n";
    }
    if (!report.auprc) {
        std::cerr << "warning: no positive labels, AUPRC is null\n";
    }

    ensure_out_dir(cfg);
    write_json(out_path(cfg, "report.json"), report_to_json(report));
    std::cout << report_to_json(report).dump(2) << "\n";
}

std::vector<AblationVariant> run_ablation(const RunConfig& cfg) {
    const TimeSeriesDataset train_raw = load_train_source(cfg);
    const TimeSeriesDataset test_raw = load_test_source(cfg);
    if (!test_raw.labels) {
        throw InvalidInput("ablation needs labeled test data");
    }

    std::vector<AblationVariant> variants;
    for (const auto& [dt, tta] :
         std::vector<std::pair<bool, bool>>{{false, false}, {true, false}, {false, true},
                                            {true, true}}) {
        variants.push_back(AblationVariant{variant_name(dt, tta), dt, tta, {}});
    }

    for (std::uint64_t seed : cfg.seeds) {
        // One training run per seed; only the test-time strategy differs
        // between variants.
        const TrainedPipeline pipeline = train_pipeline(train_raw, cfg, seed);
        for (AblationVariant& variant : variants) {
            const DetectionRun run = run_detection(pipeline.checkpoint, test_raw, cfg,
                                                   variant.use_detrend, variant.use_tta);
            AblationTrial trial;
            trial.seed = seed;
            trial.report = *run.report;
            if (cfg.use_synthetic) {
                const std::size_t covered = run.stream.covered_timesteps();
                for (std::size_t t = cfg.synth.shift_at; t < covered; ++t) {
                    if (run.stream.preds[t] == 1 && (*test_raw.labels)[t] == 0) {
                        ++trial.fp_post_shift;
                    }
                }
            }
            variant.trials.push_back(std::move(trial));
        }
    }
    return variants;
}

namespace {

json variant_to_json(const AblationVariant& variant, bool synthetic) {
    auto collect = [&](auto getter) {
        std::vector<double> values;
        for (const AblationTrial& t : variant.trials) {
            const auto v = getter(t.report);
            if (v) values.push_back(*v);
        }
        return values;
    };
    auto cell = [&](const std::vector<double>& values) -> json {
        if (values.size() != variant.trials.size()) return nullptr; // some trial lacked the metric
        const MeanStd ms = mean_std(values);
        return json{{"mean", ms.mean}, {"std", ms.std_dev}};
    };

    json j;
    j["name"] = variant.name;
    j["detrend"] = variant.use_detrend;
    j["adapt"] = variant.use_tta;
    j["F1"] = cell(collect([](const EvalReport& r) { return std::optional<double>(r.f1); }));
    j["F1+"] = cell(collect([](const EvalReport& r) { return std::optional<double>(r.f1_pa); }));
    j["AUROC"] = cell(collect([](const EvalReport& r) { return r.auroc; }));
    j["AUPRC"] = cell(collect([](const EvalReport& r) { return r.auprc; }));
    json trials = json::array();
    for (const AblationTrial& t : variant.trials) {
        json tj;
        tj["seed"] = t.seed;
        tj["report"] = report_to_json(t.report);
        if (synthetic) tj["fp_post_shift"] = t.fp_post_shift;
        trials.push_back(std::move(tj));
    }
    j["trials"] = std::move(trials);
    return j;
}

std::string format_cell(const json& cell) {
    if (cell.is_null()) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << cell["mean"].get<double>() << " +/- "
       << cell["std"].get<double>();
    return os.str();
}

std::string ablation_table(const json& variants) {
    static const char* metric_names[] = {"F1", "F1+", "AUROC", "AUPRC"};
    std::ostringstream os;
    os << std::left << std::setw(4) << "DT" << std::setw(5) << "TTA";
    for (const char* m : metric_names) os << std::setw(18) << m;
    os << '\n';
    for (const auto& v : variants) {
        os << std::left << std::setw(4) << (v["detrend"].get<bool>() ? "yes" : "no")
           << std::setw(5) << (v["adapt"].get<bool>() ? "yes" : "no");
        for (const char* m : metric_names) os << std::setw(18) << format_cell(v[m]);
        os << '\n';
    }
    return os.str();
}

} // namespace

void cmd_ablate(const RunConfig& cfg) {
    const std::vector<AblationVariant> variants = run_ablation(cfg);
    ensure_out_dir(cfg);

    json j;
    j["command"] = "ablate";
    j["config"] = config_to_json(cfg);
    json jv = json::array();
    for (const AblationVariant& v : variants) jv.push_back(variant_to_json(v, cfg.use_synthetic));
    j["variants"] = std::move(jv);
    write_json(out_path(cfg, "ablation.json"), j);

    const std::string table = ablation_table(j["variants"]);
    {
        std::ofstream out(out_path(cfg, "ablation.txt"));
        if (!out) throw InvalidInput("cannot write " + out_path(cfg, "ablation.txt"));
        out << table;
    }
    std::cout << table;
    std::cout << "wrote " << out_path(cfg, "ablation.json") << "\n";
}

void cmd_synth(const RunConfig& cfg) {
    const auto [train, test] = generate_synthetic(cfg.synth);
    ensure_out_dir(cfg);
    write_csv(train, out_path(cfg, "train.csv"));
    write_csv(test, out_path(cfg, "test.csv"));
    std::cout << "wrote " << out_path(cfg, "train.csv") << " (" << train.timesteps()
              << " timesteps) and " << out_path(cfg, "test.csv") << " (" << test.timesteps()
              << " timesteps, " << cfg.synth.anomaly_count << " anomalies)\n";
}

} // namespace tsadapt
