#pragma once

#include <cstdint>
#include <vector>

#include "tsadapt/dataset.hpp"
#include "tsadapt/model.hpp"
#include "tsadapt/trend.hpp"

namespace tsadapt {

struct AdaptationConfig {
    double gamma = 0.9;  // EMA retention; ignored when use_detrend is false
    double eta = 0.005;  // test-time learning rate; ignored when use_tta is false
    double tau = 0.0;    // anomaly threshold, strict '>'
    std::size_t window = 5;
    bool use_detrend = true; // DT
    bool use_tta = true;     // TTA

    bool operator==(const AdaptationConfig&) const = default;
};

// Mutable state of the streaming loop. Strictly sequential: one owner,
// windows processed in time order.
struct AdaptationState {
    MlpAutoencoder model;
    TrendEstimator trend;
    AdaptationConfig config;
    std::uint64_t windows_processed = 0;
};

struct WindowOutcome {
    ScoreVector scores;
    std::vector<int> preds;
};

// One stream step, in order: update trend on the raw window and detrend
// (DT), score in detrended space, threshold, then one masked SGD step on the
// self-predicted normal rows (TTA). Throws NumericFailure naming the window
// index if scores or gradients go non-finite.
WindowOutcome process_window(AdaptationState& state, const Window& window);

struct StreamResult {
    std::vector<double> scores;          // one per covered timestep
    std::vector<int> preds;              // score > tau at processing time
    std::vector<std::size_t> window_of;  // window that produced each timestep's score
    Matrix trend_trace;                  // windows x F, mu at scoring time
    std::vector<std::size_t> window_ends;

    std::size_t covered_timesteps() const { return scores.size(); }
};

// Feeds make_windows(test, config.window, stride) through process_window in
// time order. With stride = window every covered timestep is scored exactly
// once; with overlapping strides the latest window wins.
StreamResult run_stream(AdaptationState& state, const TimeSeriesDataset& test,
                        std::size_t stride);

} // namespace tsadapt
