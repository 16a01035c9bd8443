#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tsadapt/adaptation.hpp"
#include "tsadapt/metrics.hpp"
#include "tsadapt/run_config.hpp"
#include "tsadapt/serialize.hpp"

namespace tsadapt {

// Command bodies behind the CLI subcommands. They throw InvalidInput /
// NumericFailure; the CLI maps those to exit codes 2 / 1.

// Writes checkpoint.tsad, train_scores.csv, and thresholds.csv (Q90..Q100 at
// 0.1 steps) into out_dir.
void cmd_train(const RunConfig& cfg);

// Writes stream.csv (timestep, score, pred, label?, mu per feature) and
// summary.json into out_dir.
void cmd_detect(const RunConfig& cfg);

// Reads a scores CSV (+ labels), resolves the threshold spec, writes
// report.json into out_dir.
void cmd_evaluate(const RunConfig& cfg);

// Runs {none, DT, TTA, DT+TTA} x seeds and writes ablation.json plus an
// aligned ablation.txt table of mean +/- sample std per metric.
void cmd_ablate(const RunConfig& cfg);

// Writes train.csv / test.csv from the synthetic spec into out_dir.
void cmd_synth(const RunConfig& cfg);

// --- pieces shared between the commands, the acceptance suite, and tests ---

struct TrainedPipeline {
    Checkpoint checkpoint;
    std::vector<double> epoch_losses;
};

// Scale (optional), window, train; trend_init is the per-feature mean of the
// scaled training data.
TrainedPipeline train_pipeline(const TimeSeriesDataset& train_raw, const RunConfig& cfg,
                               std::uint64_t seed);

struct DetectionRun {
    StreamResult stream;
    double tau = 0.0;
    ThresholdSpec threshold_spec;
    std::optional<EvalReport> report; // present when the test data is labeled
};

// Stream the (scaled) test data through the adaptation loop using the given
// ablation switches. Threshold spec must be qP or fixed.
DetectionRun run_detection(const Checkpoint& ckpt, const TimeSeriesDataset& test_raw,
                           const RunConfig& cfg, bool use_detrend, bool use_tta);

struct AblationTrial {
    std::uint64_t seed = 0;
    EvalReport report;
    // False positives at or after the synthetic shift point; only meaningful
    // for generator-backed runs.
    std::size_t fp_post_shift = 0;
};

struct AblationVariant {
    std::string name; // "none", "dt", "tta", "dt+tta"
    bool use_detrend = false;
    bool use_tta = false;
    std::vector<AblationTrial> trials;
};

// Variants in Table order: none, DT, TTA, DT+TTA. Training is shared across
// variants within a seed; only the test-time strategy differs.
std::vector<AblationVariant> run_ablation(const RunConfig& cfg);

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0; // sample (n-1); 0 for a single trial
};

MeanStd mean_std(const std::vector<double>& values);

TimeSeriesDataset load_train_source(const RunConfig& cfg);
TimeSeriesDataset load_test_source(const RunConfig& cfg);

} // namespace tsadapt
