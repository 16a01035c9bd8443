#include "tsadapt/adaptation.hpp"

#include <cmath>
#include <string>

#include "tsadapt/errors.hpp"

namespace tsadapt {

WindowOutcome process_window(AdaptationState& state, const Window& window) {
    const AdaptationConfig& cfg = state.config;
    if (window.length() != cfg.window || window.features() != state.trend.features()) {
        throw InvalidInput("process_window: window is " + std::to_string(window.length()) + "x" +
                           std::to_string(window.features()) + ", state expects " +
                           std::to_string(cfg.window) + "x" +
                           std::to_string(state.trend.features()));
    }

    // 1. Trend update on the raw window (anomalous rows included), then detrend.
    Window x = window;
    if (cfg.use_detrend) {
        const std::vector<double>& mu = state.trend.update(window);
        x = detrend(window, mu);
    }

    // 2. Score in detrended space; adding mu back to both sides would cancel.
    const Window recon = state.model.forward(x);
    WindowOutcome outcome;
    outcome.scores = score(x, recon);
    for (double s : outcome.scores) {
        if (!std::isfinite(s)) {
            throw NumericFailure("process_window: non-finite score at stream window " +
                                 std::to_string(state.windows_processed));
        }
    }

    // 3. Strict '>' decision rule.
    outcome.preds.resize(outcome.scores.size());
    for (std::size_t i = 0; i < outcome.scores.size(); ++i) {
        outcome.preds[i] = outcome.scores[i] > cfg.tau ? 1 : 0;
    }

    // 4. One masked step on self-predicted normals; all-anomalous windows
    //    contribute a zero gradient and leave the parameters untouched.
    if (cfg.use_tta) {
        const Gradients grads = gradients(state.model, x, outcome.preds);
        try {
            sgd_step(state.model, grads, cfg.eta);
        } catch (const NumericFailure&) {
            throw NumericFailure("process_window: non-finite gradient at stream window " +
                                 std::to_string(state.windows_processed));
        }
    }

    ++state.windows_processed;
    return outcome;
}

StreamResult run_stream(AdaptationState& state, const TimeSeriesDataset& test,
                        std::size_t stride) {
    const std::size_t w = state.config.window;
    if (test.timesteps() < w) {
        throw InvalidInput("run_stream: test length " + std::to_string(test.timesteps()) +
                           " is shorter than the window " + std::to_string(w));
    }
    if (stride > w) {
        throw InvalidInput("run_stream: stride " + std::to_string(stride) +
                           " larger than the window " + std::to_string(w) +
                           " would leave unscored gaps");
    }
    const std::vector<Window> windows = make_windows(test, w, stride);
    const std::size_t covered = windows.back().end_index + 1;

    StreamResult result;
    result.scores.assign(covered, 0.0);
    result.preds.assign(covered, 0);
    result.window_of.assign(covered, 0);
    result.trend_trace = Matrix(windows.size(), test.features());
    result.window_ends.reserve(windows.size());

    for (std::size_t k = 0; k < windows.size(); ++k) {
        const WindowOutcome outcome = process_window(state, windows[k]);
        const std::size_t start = windows[k].end_index + 1 - w;
        for (std::size_t i = 0; i < w; ++i) {
            result.scores[start + i] = outcome.scores[i];
            result.preds[start + i] = outcome.preds[i];
            result.window_of[start + i] = k;
        }
        const std::vector<double>& mu = state.trend.mu();
        for (std::size_t j = 0; j < mu.size(); ++j) result.trend_trace(k, j) = mu[j];
        result.window_ends.push_back(windows[k].end_index);
    }
    return result;
}

} // namespace tsadapt
