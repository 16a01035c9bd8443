#pragma once

#include <vector>

#include "tsadapt/dataset.hpp"

namespace tsadapt {

// Per-feature exponential-moving-average level estimate:
//   mu <- gamma * mu + (1 - gamma) * column_mean(window)
// gamma = 1 freezes the estimate, gamma = 0 tracks the latest window mean.
class TrendEstimator {
public:
    TrendEstimator(std::vector<double> initial_mu, double gamma);

    // Starts mu at the per-feature mean of the training data.
    static TrendEstimator from_training(const TimeSeriesDataset& train, double gamma);

    // Applies one EMA step using the whole window (anomalous rows included)
    // and returns the new estimate.
    const std::vector<double>& update(const Window& window);

    const std::vector<double>& mu() const { return mu_; }
    double gamma() const { return gamma_; }
    std::size_t features() const { return mu_.size(); }

private:
    std::vector<double> mu_;
    double gamma_;
};

// Subtracts mu from every row. retrend is the exact additive inverse.
Window detrend(const Window& window, const std::vector<double>& mu);
Window retrend(const Window& recon, const std::vector<double>& mu);

} // namespace tsadapt
